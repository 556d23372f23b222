#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "msamil/classifier.hpp"
#include "msamil/core.hpp"
#include "msamil/error.hpp"
#include "msamil/parallel.hpp"

namespace msamil {

struct SelectionConfig {
  int pos_per_bag = 1;
  int neg_per_bag = 5;

  void validate() const {
    if (pos_per_bag < 1 || neg_per_bag < 1)
      fail(ErrorKind::InvalidConfig, "pos_per_bag and neg_per_bag must be >= 1");
  }
};

struct LabeledTile {
  Tile tile;
  int label = 0;

  friend bool operator==(const LabeledTile&, const LabeledTile&) = default;
};

/// D at iteration k: the instance-labeled set one classifier update trains on.
struct TemporarySet {
  int iteration = 1;
  std::vector<LabeledTile> entries;
};

struct TrainingHistory {
  std::vector<double> loss;
  std::vector<double> accuracy;
  std::vector<std::size_t> set_size;

  std::size_t epochs() const noexcept { return loss.size(); }
};

/// Indices of the `quota` highest probabilities, highest first; equal
/// probabilities keep the smaller index first.
inline std::vector<int> top_indices(std::span<const double> probs, int quota) {
  std::vector<int> idx(probs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return probs[a] > probs[b]; });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(quota)));
  return idx;
}

/// Top-probability instances of every bag, labeled with the bag label.
/// Bags holding fewer tiles than their quota contribute all of them.
inline std::vector<LabeledTile> select_instances(std::span<const BagPrediction> predictions,
                                                 std::span<const Bag> bags,
                                                 const SelectionConfig& config) {
  config.validate();
  if (predictions.size() != bags.size())
    fail(ErrorKind::AlignmentMismatch, "predictions and bags differ in length");
  std::vector<LabeledTile> out;
  for (std::size_t i = 0; i < bags.size(); ++i) {
    const Bag& bag = bags[i];
    const BagPrediction& pred = predictions[i];
    if (pred.bag != bag.index || pred.probs.size() != bag.tiles.size())
      fail(ErrorKind::AlignmentMismatch,
           "prediction does not line up with bag " + std::to_string(bag.index));
    const bool positive = bag.label == BagLabel::Positive;
    const int quota = positive ? config.pos_per_bag : config.neg_per_bag;
    for (int j : top_indices(pred.probs, quota)) out.push_back({bag.tiles[j], positive ? 1 : 0});
  }
  return out;
}

/// D = S (all labeled 1) followed by the selected instances. A selected
/// instance covering the same bag and origin as a reinforced tile is
/// dropped in favor of the reinforced one.
inline TemporarySet build_temporary_set(std::span<const LabeledTile> selected,
                                        std::span<const Tile> reinforced, int iteration) {
  if (iteration < 1) fail(ErrorKind::InvalidConfig, "iteration index starts at 1");
  TemporarySet d{iteration, {}};
  d.entries.reserve(selected.size() + reinforced.size());
  std::set<std::tuple<int, int, int>> footprints;
  for (const Tile& t : reinforced) {
    d.entries.push_back({t, 1});
    footprints.emplace(t.bag, t.origin.row, t.origin.col);
  }
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& e : selected) {
    const auto key = std::make_tuple(e.tile.bag, e.tile.origin.row, e.tile.origin.col);
    if (footprints.contains(key) || !seen.insert(key).second) continue;
    d.entries.push_back(e);
  }
  return d;
}

struct MilConfig {
  TrainConfig train;
  SelectionConfig selection;
  bool use_reinforced = true;
  /// Carry D over between iterations instead of rebuilding it.
  bool accumulate = false;
  unsigned threads = 1;
};

using IterationObserver = std::function<void(const TemporarySet&, const EpochStats&)>;

struct MilResult {
  ClassifierModel model;
  TrainingHistory history;
};

inline std::vector<LabeledInput> materialize(const TemporarySet& d, std::span<const Bag> bags,
                                             const std::vector<std::size_t>& bag_slot) {
  std::vector<LabeledInput> out(d.entries.size());
  for (std::size_t k = 0; k < d.entries.size(); ++k) {
    const auto& e = d.entries[k];
    const Bag& bag = bags[bag_slot.at(e.tile.bag)];
    out[k] = {tile_tensor(*bag.image, e.tile.origin, e.tile.size), e.label};
  }
  return out;
}

/// The alternating MIL loop: for k = 1..epochs, score every weak instance
/// with the current model, pick the top instances per bag, merge them with
/// the reinforced set and run one training epoch on the result.
inline MilResult train_mil(const TrainingCorpus& corpus, const Architecture& arch,
                           const MilConfig& config, const IterationObserver& observer = {}) {
  config.train.validate();
  config.selection.validate();
  if (corpus.count(BagLabel::Positive) == 0 || corpus.count(BagLabel::Negative) == 0)
    fail(ErrorKind::DegenerateCorpus, "training needs at least one positive and one negative bag");

  std::vector<std::size_t> bag_slot;
  for (std::size_t s = 0; s < corpus.bags.size(); ++s) {
    const int idx = corpus.bags[s].index;
    if (idx < 0) fail(ErrorKind::DegenerateCorpus, "negative bag index");
    if (static_cast<std::size_t>(idx) >= bag_slot.size()) bag_slot.resize(idx + 1, SIZE_MAX);
    bag_slot[idx] = s;
    for (const Tile& t : corpus.bags[s].tiles)
      if (t.size != arch.input_size)
        fail(ErrorKind::ArchitectureMismatch, "corpus tile size " + std::to_string(t.size) +
                                                  " does not match model input " +
                                                  std::to_string(arch.input_size));
  }

  MilResult result{init_model(config.train.seed, arch), {}};
  AdamState adam(result.model.params.size());
  const std::vector<Tile> reinforced =
      config.use_reinforced ? corpus.reinforced() : std::vector<Tile>{};
  std::vector<LabeledTile> carried;
  std::set<std::tuple<int, int, int>> carried_keys;

  for (int k = 1; k <= config.train.epochs; ++k) {
    const auto predictions = predict_bags(result.model, corpus.bags, config.threads);
    auto selected = select_instances(predictions, corpus.bags, config.selection);
    if (config.accumulate) {
      for (auto& e : selected)
        if (carried_keys.emplace(e.tile.bag, e.tile.origin.row, e.tile.origin.col).second)
          carried.push_back(e);
      selected = carried;
    }
    const TemporarySet d = build_temporary_set(selected, reinforced, k);
    const auto samples = materialize(d, corpus.bags, bag_slot);
    const EpochStats stats = train_epoch(result.model, adam, samples, config.train, k);
    result.history.loss.push_back(stats.mean_loss);
    result.history.accuracy.push_back(stats.accuracy);
    result.history.set_size.push_back(d.entries.size());
    if (observer) observer(d, stats);
  }
  return result;
}

inline void write_history_csv(const TrainingHistory& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot write " + path.string());
  out << "epoch,loss,acc,d_size\n";
  out.precision(9);
  for (std::size_t e = 0; e < history.epochs(); ++e)
    out << e + 1 << ',' << history.loss[e] << ',' << history.accuracy[e] << ','
        << history.set_size[e] << '\n';
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path.string());
}

}  // namespace msamil
