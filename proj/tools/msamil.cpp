// Command-line front end: gen, segment, train, eval, viz, describe.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "msamil/msamil.hpp"

namespace {

using namespace msamil;

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<int> tile_size, step, threads;
  std::optional<std::uint64_t> seed;
  bool no_mask = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_file, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "override one config entry, key=value (repeatable)");
  cmd->add_option("--tile-size", c.tile_size, "tile / window size in pixels");
  cmd->add_option("--step", c.step, "tile lattice step (default tile_size / 2)");
  cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  cmd->add_flag("--no-mask", c.no_mask, "skip segmentation and use the whole image");
}

// File first, then --set, then dedicated flags.
RunConfig build_config(const Common& c) {
  RunConfig cfg;
  if (!c.config_file.empty()) apply_config_file(cfg, c.config_file);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorKind::InvalidConfig, "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.tile_size) cfg.tiler.tile_size = *c.tile_size;
  if (c.step) cfg.tiler.step = *c.step;
  if (c.threads) cfg.set("train.threads", std::to_string(*c.threads));
  if (c.no_mask) cfg.use_mask = false;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-instance lesion classifier with box-reinforced training"};
  app.require_subcommand(1);

  // gen
  Common gen_c;
  std::string gen_out;
  std::optional<int> n_pos, n_neg, image_size;
  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  add_common(gen, gen_c);
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--n-pos", n_pos);
  gen->add_option("--n-neg", n_neg);
  gen->add_option("--image-size", image_size);
  gen->add_option("--seed", gen_c.seed, "generator seed");

  // segment
  Common seg_c;
  std::string seg_manifest, seg_out, seg_mask_dir;
  bool seg_all = false;
  auto* seg = app.add_subcommand("segment", "produce masks for rows lacking them");
  add_common(seg, seg_c);
  seg->add_option("--manifest", seg_manifest)->required()->check(CLI::ExistingFile);
  seg->add_option("--out", seg_out, "manifest to write")->required();
  seg->add_option("--mask-dir", seg_mask_dir, "directory for mask PNGs")->required();
  seg->add_flag("--all", seg_all, "re-segment rows that already have a mask");

  // train
  Common tr_c;
  std::string tr_manifest, tr_ckpt, tr_history;
  std::optional<int> pos_per_bag, neg_per_bag, epochs, batch;
  bool no_reinforced = false;
  auto* tr = app.add_subcommand("train", "run multiple-instance training");
  add_common(tr, tr_c);
  tr->add_option("--manifest", tr_manifest)->required()->check(CLI::ExistingFile);
  tr->add_option("--checkpoint", tr_ckpt, "checkpoint to write")->required();
  tr->add_option("--history", tr_history, "per-epoch history CSV");
  tr->add_option("--pos-per-bag", pos_per_bag);
  tr->add_option("--neg-per-bag", neg_per_bag);
  tr->add_option("--epochs", epochs);
  tr->add_option("--batch", batch);
  tr->add_option("--seed", tr_c.seed, "training seed");
  tr->add_flag("--no-reinforced", no_reinforced, "train without box-derived tiles");

  // eval
  Common ev_c;
  std::string ev_manifest, ev_ckpt, ev_report, ev_roc;
  std::optional<double> threshold;
  std::optional<int> ev_stride;
  auto* ev = app.add_subcommand("eval", "score a test manifest");
  add_common(ev, ev_c);
  ev->add_option("--manifest", ev_manifest)->required()->check(CLI::ExistingFile);
  ev->add_option("--checkpoint", ev_ckpt)->required()->check(CLI::ExistingFile);
  ev->add_option("--report", ev_report, "report JSON to write")->required();
  ev->add_option("--roc", ev_roc, "ROC CSV to write");
  ev->add_option("--threshold", threshold);
  ev->add_option("--stride", ev_stride);

  // viz
  Common vz_c;
  std::string vz_image, vz_mask, vz_ckpt, vz_out, vz_matrix;
  std::optional<double> alpha;
  std::optional<int> vz_stride;
  std::optional<std::string> fusion;
  bool rgba = false;
  auto* vz = app.add_subcommand("viz", "render a probability heatmap");
  add_common(vz, vz_c);
  vz->add_option("--image", vz_image)->required()->check(CLI::ExistingFile);
  vz->add_option("--mask", vz_mask, "region mask PNG (baseline segmenter when absent)");
  vz->add_option("--checkpoint", vz_ckpt)->required()->check(CLI::ExistingFile);
  vz->add_option("--out", vz_out, "heatmap PNG")->required();
  vz->add_option("--matrix", vz_matrix, "probability matrix CSV");
  vz->add_option("--alpha", alpha);
  vz->add_option("--stride", vz_stride);
  vz->add_option("--fusion", fusion, "mean or max")->check(CLI::IsMember({"mean", "max"}));
  vz->add_flag("--rgba", rgba, "write the colored overlay with its alpha channel");

  // describe
  std::string ds_manifest;
  auto* ds = app.add_subcommand("describe", "summarize a manifest");
  ds->add_option("--manifest", ds_manifest)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      RunConfig cfg = build_config(gen_c);
      if (gen_c.seed) cfg.gen.seed = *gen_c.seed;
      if (n_pos) cfg.gen.n_pos = *n_pos;
      if (n_neg) cfg.gen.n_neg = *n_neg;
      if (image_size) cfg.gen.image_size = *image_size;
      const auto manifest = pipeline::gen(cfg, gen_out);
      std::cerr << "wrote " << manifest.string() << '\n';
    } else if (*seg) {
      const RunConfig cfg = build_config(seg_c);
      const auto n = pipeline::segment(seg_manifest, cfg, seg_out, seg_mask_dir, seg_all);
      std::cerr << "segmented " << n << " images\n";
    } else if (*tr) {
      RunConfig cfg = build_config(tr_c);
      if (tr_c.seed) cfg.mil.train.seed = *tr_c.seed;
      if (pos_per_bag) cfg.mil.selection.pos_per_bag = *pos_per_bag;
      if (neg_per_bag) cfg.mil.selection.neg_per_bag = *neg_per_bag;
      if (epochs) cfg.mil.train.epochs = *epochs;
      if (batch) cfg.mil.train.batch_size = *batch;
      if (no_reinforced) cfg.mil.use_reinforced = false;
      std::optional<std::filesystem::path> history;
      if (!tr_history.empty()) history = tr_history;
      pipeline::train(tr_manifest, cfg, std::filesystem::path(tr_ckpt), history, {}, &std::cerr);
    } else if (*ev) {
      RunConfig cfg = build_config(ev_c);
      if (threshold) cfg.eval.threshold = *threshold;
      if (ev_stride) cfg.eval.stride = *ev_stride;
      std::optional<std::filesystem::path> roc;
      if (!ev_roc.empty()) roc = ev_roc;
      const auto model = load_model(ev_ckpt);
      const auto result = pipeline::eval(ev_manifest, model, cfg, std::filesystem::path(ev_report), roc);
      const auto& r = result.report;
      std::cerr << "tp " << r.counts.tp << " fp " << r.counts.fp << " fn " << r.counts.fn << " tn "
                << r.counts.tn << " f1 " << r.f1;
      if (r.roc) std::cerr << " auc " << r.roc->auc;
      std::cerr << '\n';
    } else if (*vz) {
      RunConfig cfg = build_config(vz_c);
      if (alpha) cfg.eval.alpha = *alpha;
      if (vz_stride) cfg.eval.stride = *vz_stride;
      if (fusion) cfg.set("eval.fusion", *fusion);
      std::optional<std::filesystem::path> mask, matrix;
      if (!vz_mask.empty()) mask = vz_mask;
      if (!vz_matrix.empty()) matrix = vz_matrix;
      const auto model = load_model(vz_ckpt);
      pipeline::viz(vz_image, mask, model, cfg, vz_out, rgba, matrix);
    } else if (*ds) {
      const auto s = synth::describe(ds_manifest);
      std::cout << "positives " << s.positives << "\nnegatives " << s.negatives << "\nboxes "
                << s.boxes << "\nmean_blob_area " << s.mean_blob_area << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
