#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "msamil/core.hpp"
#include "msamil/error.hpp"
#include "msamil/image.hpp"

namespace msamil {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct RocPoint {
  double fpr = 0;
  double tpr = 0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) first, (1,1) last
  /// thresholds[k] is the lowest score called positive at points[k]; +inf
  /// at the origin. Auxiliary: not persisted in report JSON and ignored by ==.
  std::vector<double> thresholds;
  double auc = 0;

  friend bool operator==(const RocCurve& a, const RocCurve& b) {
    return a.points == b.points && a.auc == b.auc;
  }
};

struct MetricsReport {
  ConfusionCounts counts;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double accuracy = 0;
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
  bool accuracy_degenerate = false;
  std::optional<RocCurve> roc;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Positive is the lesion class.
inline ConfusionCounts confusion(std::span<const BagLabel> predictions,
                                 std::span<const BagLabel> truths) {
  if (predictions.size() != truths.size() || predictions.empty())
    fail(ErrorKind::LengthMismatch, "predictions and truths must have equal nonzero length");
  ConfusionCounts c;
  for (std::size_t k = 0; k < truths.size(); ++k) {
    const bool pred = predictions[k] == BagLabel::Positive;
    const bool truth = truths[k] == BagLabel::Positive;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

/// Precision, recall, F1 and accuracy from counts. Zero denominators give 0
/// and set the matching degenerate flag. Accuracy is (TP + TN) / total.
inline MetricsReport derive_metrics(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0)
    fail(ErrorKind::InvalidConfig, "confusion counts must be nonnegative");
  MetricsReport r;
  r.counts = c;
  auto ratio = [](std::int64_t num, std::int64_t den, bool& degenerate) {
    degenerate = den == 0;
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  r.precision = ratio(c.tp, c.tp + c.fp, r.precision_degenerate);
  r.recall = ratio(c.tp, c.tp + c.fn, r.recall_degenerate);
  r.accuracy = ratio(c.tp + c.tn, c.total(), r.accuracy_degenerate);
  r.f1_degenerate = r.precision + r.recall == 0.0;
  r.f1 = r.f1_degenerate ? 0.0 : 2.0 * r.recall * r.precision / (r.recall + r.precision);
  return r;
}

inline double trapezoid_area(std::span<const RocPoint> points) {
  double area = 0;
  for (std::size_t k = 1; k < points.size(); ++k)
    area += (points[k].fpr - points[k - 1].fpr) * (points[k].tpr + points[k - 1].tpr) / 2.0;
  return area;
}

/// ROC by sweeping thresholds over the distinct scores in descending order;
/// tied scores enter as one group. FPR = FP / (FP + TN).
inline RocCurve roc_auc(std::span<const double> scores, std::span<const BagLabel> truths) {
  if (scores.size() != truths.size())
    fail(ErrorKind::LengthMismatch, "scores and truths differ in length");
  std::int64_t pos = 0, neg = 0;
  for (auto t : truths) (t == BagLabel::Positive ? pos : neg)++;
  if (pos == 0 || neg == 0)
    fail(ErrorKind::DegenerateLabels, "ROC needs at least one positive and one negative");
  for (double s : scores)
    if (!std::isfinite(s)) fail(ErrorKind::InvalidConfig, "scores must be finite");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  roc.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::int64_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    while (k < order.size() && scores[order[k]] == s) {
      (truths[order[k]] == BagLabel::Positive ? tp : fp)++;
      ++k;
    }
    roc.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos)});
    roc.thresholds.push_back(s);
  }
  roc.auc = trapezoid_area(roc.points);
  return roc;
}

/// 2|A n B| / (|A| + |B|); two empty masks score 1 by convention.
inline double dice(const BinaryMask& a, const BinaryMask& b, bool* both_empty = nullptr) {
  if (!a.same_shape(b.rows(), b.cols())) fail(ErrorKind::ShapeMismatch, "dice needs equal shapes");
  std::size_t inter = 0, na = 0, nb = 0;
  const auto da = a.data(), db = b.data();
  for (std::size_t k = 0; k < da.size(); ++k) {
    na += da[k] != 0;
    nb += db[k] != 0;
    inter += (da[k] != 0) && (db[k] != 0);
  }
  if (both_empty) *both_empty = na + nb == 0;
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

inline void write_roc_csv(const RocCurve& roc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot write " + path.string());
  out << "fpr,tpr,threshold\n";
  out.precision(17);
  for (std::size_t k = 0; k < roc.points.size(); ++k) {
    out << roc.points[k].fpr << ',' << roc.points[k].tpr << ',';
    if (k >= roc.thresholds.size()) out << "nan";
    else if (std::isinf(roc.thresholds[k])) out << "inf";
    else out << roc.thresholds[k];
    out << '\n';
  }
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path.string());
}

}  // namespace msamil
