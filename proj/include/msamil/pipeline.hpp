#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "msamil/classifier.hpp"
#include "msamil/config.hpp"
#include "msamil/inference.hpp"
#include "msamil/manifest.hpp"
#include "msamil/metrics.hpp"
#include "msamil/mil_trainer.hpp"
#include "msamil/parallel.hpp"
#include "msamil/png_io.hpp"
#include "msamil/report.hpp"
#include "msamil/synth.hpp"

namespace msamil::pipeline {

inline CorpusOptions corpus_options(const RunConfig& config, bool tile) {
  return CorpusOptions{config.segmenter, config.tiler, config.use_mask, tile};
}

inline Architecture architecture_for(const RunConfig& config) {
  Architecture arch;
  arch.input_size = config.tiler.tile_size;
  return arch;
}

inline std::filesystem::path gen(const RunConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  return synth::generate(config.gen, out_dir);
}

/// Segments every row lacking a mask (every row when `all` is set), writes
/// the post-processed masks under mask_dir and a manifest pointing at them.
inline std::size_t segment(const std::filesystem::path& manifest, const RunConfig& config,
                           const std::filesystem::path& out_manifest,
                           const std::filesystem::path& mask_dir, bool all = false) {
  config.validate();
  auto rows = read_manifest(manifest);
  std::error_code ec;
  std::filesystem::create_directories(mask_dir, ec);
  if (ec) fail(ErrorKind::IoFailure, "cannot create " + mask_dir.string());
  SegmenterConfig seg = config.segmenter;
  seg.provider = SegmenterProvider::Baseline;
  std::size_t written = 0;
  for (auto& row : rows) {
    if (!row.mask_path.empty() && !all) {
      row.mask_path = std::filesystem::absolute(resolve(manifest, row.mask_path)).string();
      row.image_path = std::filesystem::absolute(resolve(manifest, row.image_path)).string();
      continue;
    }
    LesionImage image{row.id, png::read(resolve(manifest, row.image_path), 3)};
    const RegionMask mask = postprocess_mask(msamil::segment(image, seg));
    const auto out = std::filesystem::absolute(mask_dir / (row.id + ".png"));
    png::write_mask(out, mask.pixels);
    row.mask_path = out.string();
    row.image_path = std::filesystem::absolute(resolve(manifest, row.image_path)).string();
    ++written;
  }
  write_manifest(out_manifest, rows);
  return written;
}

struct TrainOutputs {
  MilResult result;
  TrainingCorpus corpus;
};

inline TrainOutputs train(const std::filesystem::path& manifest, const RunConfig& config,
                          const std::optional<std::filesystem::path>& checkpoint,
                          const std::optional<std::filesystem::path>& history,
                          const IterationObserver& observer = {}, std::ostream* log = nullptr) {
  config.validate();
  TrainOutputs out;
  out.corpus = load_corpus(manifest, corpus_options(config, true));
  if (log) {
    *log << "corpus: " << out.corpus.bags.size() << " bags, |W_n| = "
         << out.corpus.weak_negative().size() << ", |W_p| = " << out.corpus.weak_positive().size()
         << ", |S| = " << out.corpus.reinforced().size() << '\n';
  }
  IterationObserver watch = [&](const TemporarySet& d, const EpochStats& s) {
    if (log)
      *log << "epoch " << d.iteration << ": loss " << s.mean_loss << ", acc " << s.accuracy
           << ", |D| " << d.entries.size() << '\n';
    if (observer) observer(d, s);
  };
  out.result = train_mil(out.corpus, architecture_for(config), config.mil, watch);
  if (checkpoint) save_model(out.result.model, *checkpoint);
  if (history) write_history_csv(out.result.history, *history);
  return out;
}

struct Evaluation {
  MetricsReport report;
  std::vector<double> scores;
  std::vector<BagLabel> predictions;
  std::vector<BagLabel> truths;
  std::vector<ProbabilityMatrix> matrices;
  TrainingCorpus corpus;
};

inline Evaluation evaluate(const TrainingCorpus& corpus, const ClassifierModel& model,
                           const RunConfig& config) {
  if (corpus.bags.empty()) fail(ErrorKind::DegenerateCorpus, "evaluation manifest has no rows");
  Evaluation ev;
  const std::size_t n = corpus.bags.size();
  ev.matrices.resize(n);
  const WindowConfig window{config.eval.stride, config.tiler.inclusion_fraction};
  parallel_for(n, config.mil.threads, [&](std::size_t i) {
    const Bag& bag = corpus.bags[i];
    ev.matrices[i] = slide_windows(model, *bag.image, *bag.mask, config.tiler.tile_size, window);
  });
  for (std::size_t i = 0; i < n; ++i) {
    ev.scores.push_back(image_score(ev.matrices[i]));
    ev.predictions.push_back(classify_image(ev.matrices[i], config.eval.threshold));
    ev.truths.push_back(corpus.bags[i].label);
  }
  ev.report = derive_metrics(confusion(ev.predictions, ev.truths));
  if (corpus.count(BagLabel::Positive) > 0 && corpus.count(BagLabel::Negative) > 0)
    ev.report.roc = roc_auc(ev.scores, ev.truths);
  return ev;
}

inline Evaluation eval(const std::filesystem::path& manifest, const ClassifierModel& model,
                       const RunConfig& config, const std::optional<std::filesystem::path>& report,
                       const std::optional<std::filesystem::path>& roc_csv) {
  config.validate();
  if (config.tiler.tile_size != model.arch.input_size)
    fail(ErrorKind::ArchitectureMismatch,
         "tile size " + std::to_string(config.tiler.tile_size) + " does not match checkpoint input " +
             std::to_string(model.arch.input_size));
  TrainingCorpus corpus = load_corpus(manifest, corpus_options(config, false));
  Evaluation ev = evaluate(corpus, model, config);
  ev.corpus = std::move(corpus);
  if (report) save_report(ev.report, *report);
  if (roc_csv && ev.report.roc) write_roc_csv(*ev.report.roc, *roc_csv);
  return ev;
}

/// Heatmap for one image. Without a mask path the baseline segmenter
/// provides the region (or the full frame when masks are disabled).
inline Heatmap viz(const std::filesystem::path& image_path,
                   const std::optional<std::filesystem::path>& mask_path,
                   const ClassifierModel& model, const RunConfig& config,
                   const std::filesystem::path& out_png, bool rgba = false,
                   const std::optional<std::filesystem::path>& matrix_csv = std::nullopt) {
  config.validate();
  LesionImage image{image_path.stem().string(), png::read(image_path, 3)};
  RegionMask mask;
  if (!config.use_mask) {
    mask = {full_mask(image.rows(), image.cols()), MaskSource::FullImage};
  } else if (mask_path) {
    SegmenterConfig seg = config.segmenter;
    seg.provider = SegmenterProvider::Oracle;
    mask = postprocess_mask(msamil::segment(image, seg, png::read_mask(*mask_path)));
  } else {
    SegmenterConfig seg = config.segmenter;
    seg.provider = SegmenterProvider::Baseline;
    mask = postprocess_mask(msamil::segment(image, seg));
  }
  const auto matrix = slide_windows(model, image, mask, config.tiler.tile_size,
                                    {config.eval.stride, config.tiler.inclusion_fraction});
  Heatmap heat = render_heatmap(matrix, image, mask, config.eval.alpha, config.eval.fusion);
  png::write(out_png, rgba ? heat.rgba() : heat.composite(image));
  if (matrix_csv) write_matrix_csv(matrix, *matrix_csv);
  return heat;
}

}  // namespace msamil::pipeline
