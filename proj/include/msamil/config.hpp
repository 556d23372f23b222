#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "msamil/classifier.hpp"
#include "msamil/error.hpp"
#include "msamil/inference.hpp"
#include "msamil/mil_trainer.hpp"
#include "msamil/segmenter.hpp"
#include "msamil/synth.hpp"
#include "msamil/tiler.hpp"

namespace msamil {

struct EvalConfig {
  double threshold = 0.5;
  int stride = 0;  // 0 means tile_size / 2
  Fusion fusion = Fusion::Mean;
  double alpha = 0.4;
};

/// Every module's settings. Text form is one `key = value` per line with
/// `#` comments; unknown keys are rejected.
struct RunConfig {
  synth::GenConfig gen;
  SegmenterConfig segmenter;
  bool use_mask = true;
  TilerConfig tiler;
  MilConfig mil;
  EvalConfig eval;

  RunConfig() { mil.threads = default_threads(); }

  void set(const std::string& key, const std::string& value);
  void validate() const;
  static std::vector<std::string> keys();
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] inline void bad(const std::string& key, const std::string& value, const char* want) {
  fail(ErrorKind::InvalidConfig, "config " + key + " = '" + value + "': expected " + want);
}

template <typename T>
T number(const std::string& key, const std::string& value) {
  T v{};
  if constexpr (std::is_floating_point_v<T>) {
    std::size_t used = 0;
    try {
      v = static_cast<T>(std::stod(value, &used));
    } catch (...) {
      bad(key, value, "a number");
    }
    if (used != value.size()) bad(key, value, "a number");
  } else {
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || p != value.data() + value.size() || value.empty())
      bad(key, value, "an integer");
  }
  return v;
}

inline bool boolean(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad(key, value, "a boolean");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto integer = [](auto member) {
      return [member](RunConfig& c, const std::string& k, const std::string& v) {
        member(c) = number<int>(k, v);
      };
    };
    auto real = [](auto member) {
      return [member](RunConfig& c, const std::string& k, const std::string& v) {
        member(c) = number<double>(k, v);
      };
    };
    auto flag = [](auto member) {
      return [member](RunConfig& c, const std::string& k, const std::string& v) {
        member(c) = boolean(k, v);
      };
    };
    t["gen.seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.gen.seed = number<std::uint64_t>(k, v);
    };
    t["gen.n_pos"] = integer([](RunConfig& c) -> int& { return c.gen.n_pos; });
    t["gen.n_neg"] = integer([](RunConfig& c) -> int& { return c.gen.n_neg; });
    t["gen.image_size"] = integer([](RunConfig& c) -> int& { return c.gen.image_size; });
    t["gen.blob_radius_min"] = real([](RunConfig& c) -> double& { return c.gen.blob_radius_min; });
    t["gen.blob_radius_max"] = real([](RunConfig& c) -> double& { return c.gen.blob_radius_max; });
    t["gen.spikes_min"] = integer([](RunConfig& c) -> int& { return c.gen.spikes_min; });
    t["gen.spikes_max"] = integer([](RunConfig& c) -> int& { return c.gen.spikes_max; });
    t["gen.motif_min"] = integer([](RunConfig& c) -> int& { return c.gen.motif_min; });
    t["gen.motif_max"] = integer([](RunConfig& c) -> int& { return c.gen.motif_max; });
    t["gen.noise"] = real([](RunConfig& c) -> double& { return c.gen.noise; });
    t["gen.box_size"] = integer([](RunConfig& c) -> int& { return c.gen.box_size; });
    t["gen.clutter_probability"] =
        real([](RunConfig& c) -> double& { return c.gen.clutter_probability; });
    t["gen.decoys_min"] = integer([](RunConfig& c) -> int& { return c.gen.decoys_min; });
    t["gen.decoys_max"] = integer([](RunConfig& c) -> int& { return c.gen.decoys_max; });
    t["gen.motif_contrast"] = real([](RunConfig& c) -> double& { return c.gen.motif_contrast; });
    t["gen.suppress_motifs"] = flag([](RunConfig& c) -> bool& { return c.gen.suppress_motifs; });

    t["segment.provider"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "oracle") c.segmenter.provider = SegmenterProvider::Oracle;
      else if (v == "baseline") c.segmenter.provider = SegmenterProvider::Baseline;
      else bad(k, v, "oracle or baseline");
    };
    t["segment.threshold"] = integer([](RunConfig& c) -> int& { return c.segmenter.baseline_threshold; });
    t["segment.morphology_radius"] =
        integer([](RunConfig& c) -> int& { return c.segmenter.morphology_radius; });
    t["segment.use_mask"] = flag([](RunConfig& c) -> bool& { return c.use_mask; });

    t["tiler.tile_size"] = integer([](RunConfig& c) -> int& { return c.tiler.tile_size; });
    t["tiler.step"] = integer([](RunConfig& c) -> int& { return c.tiler.step; });
    t["tiler.inclusion_fraction"] =
        real([](RunConfig& c) -> double& { return c.tiler.inclusion_fraction; });

    t["train.epochs"] = integer([](RunConfig& c) -> int& { return c.mil.train.epochs; });
    t["train.batch"] = integer([](RunConfig& c) -> int& { return c.mil.train.batch_size; });
    t["train.learning_rate"] = real([](RunConfig& c) -> double& { return c.mil.train.learning_rate; });
    t["train.lr_decay"] = real([](RunConfig& c) -> double& { return c.mil.train.lr_decay; });
    t["train.decay_epochs"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      std::vector<int> epochs;
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) epochs.push_back(number<int>(k, item));
      }
      c.mil.train.decay_epochs = epochs;
    };
    t["train.seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.mil.train.seed = number<std::uint64_t>(k, v);
    };
    t["train.pos_per_bag"] = integer([](RunConfig& c) -> int& { return c.mil.selection.pos_per_bag; });
    t["train.neg_per_bag"] = integer([](RunConfig& c) -> int& { return c.mil.selection.neg_per_bag; });
    t["train.reinforced"] = flag([](RunConfig& c) -> bool& { return c.mil.use_reinforced; });
    t["train.accumulate"] = flag([](RunConfig& c) -> bool& { return c.mil.accumulate; });
    t["train.threads"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      const int n = number<int>(k, v);
      if (n < 0) bad(k, v, "a thread count >= 0");
      c.mil.threads = n == 0 ? default_threads() : static_cast<unsigned>(n);
    };

    t["eval.threshold"] = real([](RunConfig& c) -> double& { return c.eval.threshold; });
    t["eval.stride"] = integer([](RunConfig& c) -> int& { return c.eval.stride; });
    t["eval.fusion"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "mean") c.eval.fusion = Fusion::Mean;
      else if (v == "max") c.eval.fusion = Fusion::Max;
      else bad(k, v, "mean or max");
    };
    t["eval.alpha"] = real([](RunConfig& c) -> double& { return c.eval.alpha; });
    return t;
  }();
  return table;
}

}  // namespace config_detail

inline void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& table = config_detail::setters();
  const auto it = table.find(key);
  if (it == table.end()) fail(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
  it->second(*this, key, value);
}

inline std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : config_detail::setters()) out.push_back(k);
  return out;
}

inline void RunConfig::validate() const {
  gen.validate();
  segmenter.validate();
  tiler.validate();
  mil.train.validate();
  mil.selection.validate();
  if (!(eval.threshold >= 0.0 && eval.threshold <= 1.0))
    fail(ErrorKind::InvalidConfig, "eval.threshold must be in [0, 1]");
  if (eval.stride < 0 || eval.stride > tiler.tile_size)
    fail(ErrorKind::InvalidConfig, "eval.stride must be in [1, tile_size] (0 = tile_size / 2)");
  if (!(eval.alpha >= 0.0 && eval.alpha <= 1.0))
    fail(ErrorKind::InvalidConfig, "eval.alpha must be in [0, 1]");
}

/// Applies `key = value` lines on top of `config`.
inline void apply_config_text(RunConfig& config, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = config_detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::InvalidConfig, "config line " + std::to_string(lineno) + ": expected key = value");
    config.set(config_detail::trim(body.substr(0, eq)), config_detail::trim(body.substr(eq + 1)));
  }
}

inline void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::MissingFile, "no such file: " + path.string());
  std::ifstream in(path);
  apply_config_text(config, in);
}

}  // namespace msamil
