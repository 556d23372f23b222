#include <gtest/gtest.h>

#include "support.hpp"

using namespace msamil;
using msamil::testing::make_bag;
using msamil::testing::noise_image;
using msamil::testing::rect_mask;

namespace {

// Direct enumeration: every origin multiple of step with the window inside
// the image, pixel-counted.
std::vector<Origin> brute_force(const BinaryMask& m, int s, int step, double frac) {
  std::vector<Origin> out;
  for (int r = 0; r + s <= m.rows(); r += step)
    for (int c = 0; c + s <= m.cols(); c += step) {
      int fg = 0;
      for (int y = r; y < r + s; ++y)
        for (int x = c; x < c + s; ++x) fg += m.at(y, x);
      if (fg >= frac * s * s) out.push_back({r, c});
    }
  return out;
}

}  // namespace

TEST(Tiler, DefaultStepIsHalfTile) {
  TilerConfig cfg;
  EXPECT_EQ(cfg.tile_size, 50);
  EXPECT_EQ(cfg.effective_step(), 25);
  EXPECT_DOUBLE_EQ(cfg.inclusion_fraction, 0.5);
}

TEST(Tiler, LatticeDropsResidualStrip) {
  const auto l = make_lattice(128, 100, 16, 8);
  EXPECT_EQ(l.rows, 15);
  EXPECT_EQ(l.cols, 11);  // last origin 80, strip 96..99 uncovered
  EXPECT_EQ(l.origin(2, 3), (Origin{16, 24}));
}

TEST(Tiler, FullMaskYieldsEveryLatticeWindow) {
  auto bag = make_bag(0, noise_image(100, 100, 1), full_mask(100, 100), BagLabel::Positive);
  const auto tiles = partition_tiles(bag, TilerConfig{});
  ASSERT_EQ(tiles.size(), 9u);  // origins 0, 25, 50 on both axes
  EXPECT_EQ(tiles[4].origin, (Origin{25, 25}));
  for (std::size_t k = 0; k < tiles.size(); ++k) {
    EXPECT_EQ(tiles[k].index, static_cast<int>(k));
    EXPECT_EQ(tiles[k].label, TileLabel::Positive);
    EXPECT_EQ(tiles[k].provenance, Provenance::Weak);
  }
}

TEST(Tiler, InclusionBoundaryIsInclusive) {
  // Exactly half of a 4x4 window: included at 0.5, excluded above.
  auto bag = make_bag(0, noise_image(4, 4, 2), rect_mask(4, 4, 0, 0, 2, 4), BagLabel::Negative);
  TilerConfig cfg{4, 4, 0.5};
  EXPECT_EQ(partition_tiles(bag, cfg).size(), 1u);
  cfg.inclusion_fraction = 0.51;
  try {
    partition_tiles(bag, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoTilesIncluded);
  }
}

TEST(Tiler, MatchesBruteForceOnRandomMasks) {
  Rng rng(2024);
  for (int t = 0; t < 200; ++t) {
    const int s = 2 + static_cast<int>(rng.below(10));
    const int rows = s + static_cast<int>(rng.below(40)), cols = s + static_cast<int>(rng.below(40));
    const int step = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(s)));
    const double frac = rng.uniform(0.05, 1.0);
    BinaryMask m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m.set(r, c, rng.uniform() < 0.6);
    const auto expected = brute_force(m, s, step, frac);
    auto bag = make_bag(t, noise_image(rows, cols, t), m, BagLabel::Negative);
    TilerConfig cfg{s, step, frac};
    if (expected.empty()) {
      EXPECT_THROW(partition_tiles(bag, cfg), Error);
      continue;
    }
    const auto tiles = partition_tiles(bag, cfg);
    ASSERT_EQ(tiles.size(), expected.size());
    for (std::size_t k = 0; k < tiles.size(); ++k) {
      EXPECT_EQ(tiles[k].origin, expected[k]);
      EXPECT_EQ(tiles[k].bag, t);
      EXPECT_EQ(tiles[k].size, s);
    }
  }
}

TEST(Tiler, ReinforcedTileAnchorsAtBoxCorner) {
  auto bag = make_bag(3, noise_image(128, 128, 3), full_mask(128, 128), BagLabel::Positive,
                      {{10, 20, 16, 16}, {120, 0, 8, 8}, {0, 125, 3, 3}});
  const auto tiles = extract_reinforced_tiles(bag, TilerConfig{16, 8, 0.5});
  ASSERT_EQ(tiles.size(), 3u);
  EXPECT_EQ(tiles[0].origin, (Origin{10, 20}));
  EXPECT_EQ(tiles[1].origin, (Origin{112, 0}));  // clamped to H - s
  EXPECT_EQ(tiles[2].origin, (Origin{0, 112}));
  for (const auto& t : tiles) {
    EXPECT_EQ(t.label, TileLabel::Positive);
    EXPECT_EQ(t.provenance, Provenance::Reinforced);
    EXPECT_EQ(t.bag, 3);
  }
}

TEST(Tiler, BoxOutsideImageRejected) {
  auto bag = make_bag(0, noise_image(64, 64, 4), full_mask(64, 64), BagLabel::Positive,
                      {{60, 60, 10, 10}});
  try {
    extract_reinforced_tiles(bag, TilerConfig{16, 8, 0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BoxOutsideImage);
  }
}

TEST(Tiler, InvalidConfigurations) {
  EXPECT_THROW((TilerConfig{0, 0, 0.5}.validate()), Error);
  EXPECT_THROW((TilerConfig{16, 0, 0.0}.validate()), Error);
  EXPECT_THROW((TilerConfig{16, 0, 1.5}.validate()), Error);
  EXPECT_THROW((TilerConfig{16, 0, 0.5}.validate_for(10, 40)), Error);
}

TEST(Tiler, CorpusPartitions) {
  TrainingCorpus corpus;
  corpus.bags.push_back(make_bag(0, noise_image(32, 32, 5), full_mask(32, 32), BagLabel::Negative));
  corpus.bags.push_back(
      make_bag(1, noise_image(32, 32, 6), full_mask(32, 32), BagLabel::Positive, {{4, 4, 8, 8}}));
  const TilerConfig cfg{16, 8, 0.5};
  for (auto& b : corpus.bags) {
    b.tiles = partition_tiles(b, cfg);
    b.reinforced = extract_reinforced_tiles(b, cfg);
  }
  EXPECT_EQ(corpus.weak_negative().size(), 9u);
  EXPECT_EQ(corpus.weak_positive().size(), 9u);
  EXPECT_EQ(corpus.reinforced().size(), 1u);
  EXPECT_EQ(corpus.all_tiles().size(), 19u);
}
