#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "msamil/core.hpp"
#include "msamil/error.hpp"

namespace msamil {

struct TilerConfig {
  int tile_size = 50;
  int step = 0;  // 0 means tile_size / 2
  double inclusion_fraction = 0.5;

  int effective_step() const noexcept { return step > 0 ? step : std::max(1, tile_size / 2); }

  void validate() const {
    if (tile_size < 1) fail(ErrorKind::InvalidConfig, "tile_size must be >= 1");
    const int st = effective_step();
    if (st < 1 || st > tile_size) fail(ErrorKind::InvalidConfig, "step must be in [1, tile_size]");
    if (!(inclusion_fraction > 0.0 && inclusion_fraction <= 1.0))
      fail(ErrorKind::InvalidConfig, "inclusion_fraction must be in (0, 1]");
  }

  void validate_for(int rows, int cols) const {
    validate();
    if (tile_size > std::min(rows, cols))
      fail(ErrorKind::ShapeMismatch, "tile_size exceeds image dimensions");
  }
};

/// Summed-area table over a binary mask for O(1) footprint counts.
class MaskIntegral {
 public:
  explicit MaskIntegral(const BinaryMask& mask)
      : cols_(mask.cols() + 1),
        sums_(static_cast<std::size_t>(mask.rows() + 1) * (mask.cols() + 1), 0) {
    for (int r = 0; r < mask.rows(); ++r) {
      std::int64_t row = 0;
      for (int c = 0; c < mask.cols(); ++c) {
        row += mask.at(r, c);
        at(r + 1, c + 1) = at(r, c + 1) + row;
      }
    }
  }

  std::int64_t count(int r, int c, int h, int w) const {
    return at(r + h, c + w) - at(r, c + w) - at(r + h, c) + at(r, c);
  }

 private:
  std::int64_t& at(int r, int c) { return sums_[static_cast<std::size_t>(r) * cols_ + c]; }
  std::int64_t at(int r, int c) const { return sums_[static_cast<std::size_t>(r) * cols_ + c]; }

  int cols_;
  std::vector<std::int64_t> sums_;
};

/// Window lattice shared by tiling and sliding-window inference:
/// origins (a*step, b*step) for a = 0..floor((H-s)/step), same for columns.
/// The residual strip at the right/bottom edge is not covered.
struct Lattice {
  int rows = 0;
  int cols = 0;
  int step = 1;
  int size = 1;

  Origin origin(int a, int b) const noexcept { return {a * step, b * step}; }
};

inline Lattice make_lattice(int image_rows, int image_cols, int size, int step) {
  Lattice l;
  l.size = size;
  l.step = step;
  l.rows = image_rows >= size ? (image_rows - size) / step + 1 : 0;
  l.cols = image_cols >= size ? (image_cols - size) / step + 1 : 0;
  return l;
}

inline bool window_included(const MaskIntegral& integral, Origin o, int size, double fraction) {
  const auto fg = integral.count(o.row, o.col, size, size);
  return static_cast<double>(fg) >= fraction * static_cast<double>(size) * size;
}

/// Weakly labeled instances of a bag: every lattice window whose foreground
/// fraction reaches the inclusion threshold, labeled with the bag label.
inline std::vector<Tile> partition_tiles(const Bag& bag, const TilerConfig& config) {
  const RegionMask& mask = *bag.mask;
  config.validate_for(mask.rows(), mask.cols());
  const int s = config.tile_size;
  const Lattice lattice = make_lattice(mask.rows(), mask.cols(), s, config.effective_step());
  const MaskIntegral integral(mask.pixels);
  const TileLabel label =
      bag.label == BagLabel::Positive ? TileLabel::Positive : TileLabel::Negative;

  std::vector<Tile> tiles;
  for (int a = 0; a < lattice.rows; ++a)
    for (int b = 0; b < lattice.cols; ++b) {
      const Origin o = lattice.origin(a, b);
      if (!window_included(integral, o, s, config.inclusion_fraction)) continue;
      tiles.push_back(Tile{bag.index, static_cast<int>(tiles.size()), o, s, label,
                           Provenance::Weak});
    }
  if (tiles.empty())
    fail(ErrorKind::NoTilesIncluded,
         "no tile reaches the inclusion fraction in bag " + std::to_string(bag.index));
  return tiles;
}

/// One positive instance per box, anchored at the box's top-left corner and
/// shifted back inside the image when the s x s footprint would overhang.
inline std::vector<Tile> extract_reinforced_tiles(const Bag& bag, const TilerConfig& config) {
  const int rows = bag.image->rows(), cols = bag.image->cols();
  config.validate_for(rows, cols);
  const int s = config.tile_size;
  std::vector<Tile> tiles;
  tiles.reserve(bag.boxes.size());
  for (const auto& box : bag.boxes) {
    if (!box.inside(rows, cols))
      fail(ErrorKind::BoxOutsideImage, "box outside image bounds in bag " + std::to_string(bag.index));
    const Origin o{std::clamp(box.row, 0, rows - s), std::clamp(box.col, 0, cols - s)};
    tiles.push_back(Tile{bag.index, static_cast<int>(tiles.size()), o, s, TileLabel::Positive,
                         Provenance::Reinforced});
  }
  return tiles;
}

}  // namespace msamil
