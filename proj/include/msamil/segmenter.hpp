#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "msamil/error.hpp"
#include "msamil/image.hpp"

namespace msamil {

enum class SegmenterProvider { Oracle, Baseline };

struct SegmenterConfig {
  SegmenterProvider provider = SegmenterProvider::Oracle;
  int baseline_threshold = 200;  // gray < threshold is foreground
  int morphology_radius = 2;

  void validate() const {
    if (baseline_threshold < 0 || baseline_threshold > 255)
      fail(ErrorKind::InvalidConfig, "baseline_threshold must be in [0,255]");
    if (morphology_radius < 0) fail(ErrorKind::InvalidConfig, "morphology_radius must be >= 0");
  }
};

namespace segment_detail {

struct Offset {
  int dr;
  int dc;
};

inline constexpr Offset kFour[] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
inline constexpr Offset kEight[] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1},
                                    {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};

inline std::vector<Offset> disk(int radius) {
  std::vector<Offset> out;
  for (int dr = -radius; dr <= radius; ++dr)
    for (int dc = -radius; dc <= radius; ++dc)
      if (dr * dr + dc * dc <= radius * radius) out.push_back({dr, dc});
  return out;
}

// Pixels outside the raster count as background for both operations.
inline BinaryMask dilate(const BinaryMask& in, const std::vector<Offset>& se) {
  BinaryMask out(in.rows(), in.cols());
  for (int r = 0; r < in.rows(); ++r)
    for (int c = 0; c < in.cols(); ++c) {
      if (!in.at(r, c)) continue;
      for (auto o : se)
        if (in.contains(r + o.dr, c + o.dc)) out.set(r + o.dr, c + o.dc, true);
    }
  return out;
}

inline BinaryMask erode(const BinaryMask& in, const std::vector<Offset>& se) {
  BinaryMask out(in.rows(), in.cols());
  for (int r = 0; r < in.rows(); ++r)
    for (int c = 0; c < in.cols(); ++c) {
      bool keep = true;
      for (auto o : se) {
        const int rr = r + o.dr, cc = c + o.dc;
        if (!in.contains(rr, cc) || !in.at(rr, cc)) {
          keep = false;
          break;
        }
      }
      out.set(r, c, keep);
    }
  return out;
}

}  // namespace segment_detail

/// Connected-component labeling. Returns a label raster (0 = not in the
/// selected value, components numbered from 1 in raster-scan order of their
/// first pixel) and the pixel count per component.
struct Components {
  Raster<int> labels;
  std::vector<std::size_t> sizes;  // sizes[k - 1] for label k
};

template <std::size_t N>
Components label_components(const BinaryMask& mask, bool value,
                            const segment_detail::Offset (&neighbors)[N]) {
  Components out{Raster<int>(mask.rows(), mask.cols(), 1, 0), {}};
  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c) {
      if (mask.at(r, c) != value || out.labels(r, c) != 0) continue;
      const int id = static_cast<int>(out.sizes.size()) + 1;
      std::size_t size = 0;
      stack.assign(1, {r, c});
      out.labels(r, c) = id;
      while (!stack.empty()) {
        auto [pr, pc] = stack.back();
        stack.pop_back();
        ++size;
        for (auto o : neighbors) {
          const int rr = pr + o.dr, cc = pc + o.dc;
          if (mask.contains(rr, cc) && mask.at(rr, cc) == value && out.labels(rr, cc) == 0) {
            out.labels(rr, cc) = id;
            stack.emplace_back(rr, cc);
          }
        }
      }
      out.sizes.push_back(size);
    }
  return out;
}

inline Components foreground_components(const BinaryMask& mask) {
  return label_components(mask, true, segment_detail::kFour);
}

/// Background 8-components that never touch the raster border.
inline std::size_t count_holes(const BinaryMask& mask) {
  auto bg = label_components(mask, false, segment_detail::kEight);
  std::vector<bool> touches(bg.sizes.size(), false);
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c) {
      const bool border = r == 0 || c == 0 || r == mask.rows() - 1 || c == mask.cols() - 1;
      const int id = bg.labels(r, c);
      if (border && id > 0) touches[id - 1] = true;
    }
  return static_cast<std::size_t>(std::count(touches.begin(), touches.end(), false));
}

/// Keeps the largest 4-connected foreground component and fills every
/// background region (8-connected) not reachable from the border. Equal-size
/// components resolve to the one found first in raster order, i.e. the one
/// whose minimal (row, col) pixel is smallest.
inline RegionMask postprocess_mask(const RegionMask& input) {
  const BinaryMask& mask = input.pixels;
  const Components fg = foreground_components(mask);
  if (fg.sizes.empty()) fail(ErrorKind::EmptyForeground, "mask has no foreground pixels");

  int keep = 1;
  for (std::size_t k = 1; k < fg.sizes.size(); ++k)
    if (fg.sizes[k] > fg.sizes[keep - 1]) keep = static_cast<int>(k) + 1;

  BinaryMask kept(mask.rows(), mask.cols());
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c) kept.set(r, c, fg.labels(r, c) == keep);

  // Flood the background from the border; whatever stays unreached is a hole.
  BinaryMask outside(mask.rows(), mask.cols());
  std::vector<std::pair<int, int>> stack;
  auto seed = [&](int r, int c) {
    if (!kept.at(r, c) && !outside.at(r, c)) {
      outside.set(r, c, true);
      stack.emplace_back(r, c);
    }
  };
  for (int r = 0; r < mask.rows(); ++r) {
    seed(r, 0);
    seed(r, mask.cols() - 1);
  }
  for (int c = 0; c < mask.cols(); ++c) {
    seed(0, c);
    seed(mask.rows() - 1, c);
  }
  while (!stack.empty()) {
    auto [r, c] = stack.back();
    stack.pop_back();
    for (auto o : segment_detail::kEight) {
      const int rr = r + o.dr, cc = c + o.dc;
      if (kept.contains(rr, cc)) seed(rr, cc);
    }
  }

  RegionMask out{BinaryMask(mask.rows(), mask.cols()), input.source};
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c) out.pixels.set(r, c, !outside.at(r, c));
  return out;
}

inline BinaryMask threshold_mask(const LesionImage& image, int threshold) {
  const RgbRaster& px = image.pixels;
  BinaryMask out(px.rows(), px.cols());
  for (int r = 0; r < px.rows(); ++r)
    for (int c = 0; c < px.cols(); ++c) {
      const int sum = px(r, c, 0) + px(r, c, 1) + px(r, c, 2);
      out.set(r, c, sum < 3 * threshold);
    }
  return out;
}

inline BinaryMask morphological_close(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  const auto se = segment_detail::disk(radius);
  return segment_detail::erode(segment_detail::dilate(mask, se), se);
}

/// Raw region mask before post-processing. The oracle provider returns the
/// file-supplied mask untouched; the baseline thresholds the mean channel
/// intensity and applies a morphological closing.
inline RegionMask segment(const LesionImage& image, const SegmenterConfig& config,
                          const std::optional<BinaryMask>& oracle = std::nullopt) {
  config.validate();
  if (config.provider == SegmenterProvider::Oracle) {
    if (!oracle) fail(ErrorKind::OracleMaskMissing, "no oracle mask for image " + image.id);
    if (!oracle->same_shape(image.rows(), image.cols()))
      fail(ErrorKind::ShapeMismatch, "oracle mask shape differs from image " + image.id);
    return RegionMask{*oracle, MaskSource::OracleFile};
  }
  BinaryMask raw = morphological_close(threshold_mask(image, config.baseline_threshold),
                                       config.morphology_radius);
  if (raw.count() == 0)
    fail(ErrorKind::EmptyForeground, "baseline segmenter found no foreground in " + image.id);
  return RegionMask{std::move(raw), MaskSource::BaselineSegmenter};
}

}  // namespace msamil
