#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "msamil/image.hpp"

namespace msamil {

enum class BagLabel { Negative = 0, Positive = 1 };

inline int as_int(BagLabel l) noexcept { return l == BagLabel::Positive ? 1 : 0; }

enum class TileLabel { Negative, Positive, Unknown };
enum class Provenance { Weak, Reinforced };

struct BoxAnnotation {
  int row = 0;
  int col = 0;
  int height = 50;
  int width = 50;

  bool inside(int rows, int cols) const noexcept {
    return row >= 0 && col >= 0 && height > 0 && width > 0 && row + height <= rows &&
           col + width <= cols;
  }

  bool intersects(int r, int c, int h, int w) const noexcept {
    return r < row + height && row < r + h && c < col + width && col < c + w;
  }

  friend bool operator==(const BoxAnnotation&, const BoxAnnotation&) = default;
};

struct Origin {
  int row = 0;
  int col = 0;
  friend bool operator==(const Origin&, const Origin&) = default;
  friend auto operator<=>(const Origin&, const Origin&) = default;
};

/// One instance: an s x s footprint inside a bag's image.
struct Tile {
  int bag = 0;
  int index = 0;
  Origin origin;
  int size = 0;
  TileLabel label = TileLabel::Unknown;
  Provenance provenance = Provenance::Weak;

  friend bool operator==(const Tile&, const Tile&) = default;
};

struct Bag {
  int index = 0;
  std::shared_ptr<const LesionImage> image;
  std::shared_ptr<const RegionMask> mask;
  BagLabel label = BagLabel::Negative;
  std::vector<BoxAnnotation> boxes;
  std::vector<Tile> tiles;       // weak instances, row-major
  std::vector<Tile> reinforced;  // box-derived instances, box order
};

/// Bags plus the three instance partitions: W_n (weak tiles of negative
/// bags), W_p (weak tiles of positive bags) and S (reinforced tiles).
struct TrainingCorpus {
  std::vector<Bag> bags;

  std::vector<Tile> weak_negative() const { return collect(BagLabel::Negative, false); }
  std::vector<Tile> weak_positive() const { return collect(BagLabel::Positive, false); }
  std::vector<Tile> reinforced() const { return collect(BagLabel::Positive, true); }

  /// N = W_n u W_p u S.
  std::vector<Tile> all_tiles() const {
    std::vector<Tile> out = weak_negative();
    auto wp = weak_positive();
    auto s = reinforced();
    out.insert(out.end(), wp.begin(), wp.end());
    out.insert(out.end(), s.begin(), s.end());
    return out;
  }

  std::size_t count(BagLabel label) const {
    std::size_t n = 0;
    for (const auto& b : bags) n += b.label == label;
    return n;
  }

 private:
  std::vector<Tile> collect(BagLabel label, bool reinforced_set) const {
    std::vector<Tile> out;
    for (const auto& b : bags) {
      if (b.label != label) continue;
      const auto& src = reinforced_set ? b.reinforced : b.tiles;
      out.insert(out.end(), src.begin(), src.end());
    }
    return out;
  }
};

}  // namespace msamil
