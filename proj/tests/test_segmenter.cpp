#include <gtest/gtest.h>

#include <queue>

#include "support.hpp"

using namespace msamil;
using msamil::testing::rect_mask;

namespace {

// Reference: BFS over 4-neighbors, returns component count.
int count_components4(const BinaryMask& m) {
  std::vector<int> seen(m.size(), 0);
  int n = 0;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) {
      if (!m.at(r, c) || seen[r * m.cols() + c]) continue;
      ++n;
      std::queue<std::pair<int, int>> q;
      q.push({r, c});
      seen[r * m.cols() + c] = 1;
      while (!q.empty()) {
        auto [y, x] = q.front();
        q.pop();
        const int dy[] = {-1, 1, 0, 0}, dx[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int ny = y + dy[k], nx = x + dx[k];
          if (ny < 0 || nx < 0 || ny >= m.rows() || nx >= m.cols()) continue;
          if (!m.at(ny, nx) || seen[ny * m.cols() + nx]) continue;
          seen[ny * m.cols() + nx] = 1;
          q.push({ny, nx});
        }
      }
    }
  return n;
}

BinaryMask random_mask(Rng& rng, int rows, int cols, double density) {
  BinaryMask m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m.set(r, c, rng.uniform() < density);
  return m;
}

LesionImage blank_image(int rows, int cols, std::uint8_t v) {
  return LesionImage{"blank", RgbRaster(rows, cols, 3, v)};
}

}  // namespace

TEST(Segmenter, ComponentLabelingMatchesBfs) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto m = random_mask(rng, 1 + static_cast<int>(rng.below(20)),
                               1 + static_cast<int>(rng.below(20)), 0.45);
    EXPECT_EQ(static_cast<int>(foreground_components(m).sizes.size()), count_components4(m));
  }
}

TEST(Segmenter, DiagonalPixelsAreSeparateComponents) {
  BinaryMask m(3, 3);
  m.set(0, 0, true);
  m.set(1, 1, true);
  EXPECT_EQ(foreground_components(m).sizes.size(), 2u);
}

TEST(Segmenter, KeepsLargestComponent) {
  BinaryMask m = rect_mask(20, 20, 1, 1, 3, 3);
  for (int r = 10; r < 16; ++r)
    for (int c = 10; c < 16; ++c) m.set(r, c, true);
  const auto out = postprocess_mask({m, MaskSource::OracleFile});
  EXPECT_EQ(out.pixels, rect_mask(20, 20, 10, 10, 6, 6));
  EXPECT_EQ(out.source, MaskSource::OracleFile);
}

TEST(Segmenter, EqualSizeTieKeepsFirstInRasterOrder) {
  BinaryMask m = rect_mask(10, 10, 6, 0, 2, 2);
  for (int r = 0; r < 2; ++r)
    for (int c = 7; c < 9; ++c) m.set(r, c, true);
  const auto out = postprocess_mask({m, MaskSource::OracleFile});
  EXPECT_EQ(out.pixels, rect_mask(10, 10, 0, 7, 2, 2));
}

TEST(Segmenter, FillsInteriorHoles) {
  BinaryMask ring = rect_mask(12, 12, 2, 2, 8, 8);
  for (int r = 4; r < 8; ++r)
    for (int c = 4; c < 8; ++c) ring.set(r, c, false);
  EXPECT_EQ(count_holes(ring), 1u);
  const auto out = postprocess_mask({ring, MaskSource::OracleFile});
  EXPECT_EQ(out.pixels, rect_mask(12, 12, 2, 2, 8, 8));
  EXPECT_EQ(count_holes(out.pixels), 0u);
}

TEST(Segmenter, BackgroundTouchingBorderIsNotAHole) {
  // U shape open to the top edge.
  BinaryMask u = rect_mask(8, 8, 0, 1, 7, 6);
  for (int r = 0; r < 5; ++r)
    for (int c = 3; c < 5; ++c) u.set(r, c, false);
  EXPECT_EQ(count_holes(u), 0u);
  EXPECT_EQ(postprocess_mask({u, MaskSource::OracleFile}).pixels, u);
}

TEST(Segmenter, DiagonalGapLeaksBackgroundOut) {
  // Background pocket connected to the outside only through a diagonal step
  // is exterior under 8-connectivity.
  BinaryMask m = rect_mask(7, 7, 1, 1, 5, 5);
  m.set(3, 3, false);
  m.set(2, 2, false);
  m.set(1, 1, false);
  EXPECT_EQ(count_holes(m), 0u);
}

TEST(Segmenter, EmptyMaskRejected) {
  try {
    postprocess_mask({BinaryMask(5, 5), MaskSource::OracleFile});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyForeground);
  }
}

TEST(Segmenter, PostprocessPropertiesOnRandomMasks) {
  Rng rng(99);
  for (int t = 0; t < 100; ++t) {
    const int rows = 4 + static_cast<int>(rng.below(40)), cols = 4 + static_cast<int>(rng.below(40));
    auto m = random_mask(rng, rows, cols, rng.uniform(0.2, 0.8));
    if (m.count() == 0) m.set(0, 0, true);
    const auto once = postprocess_mask({m, MaskSource::OracleFile});
    EXPECT_EQ(count_components4(once.pixels), 1);
    EXPECT_EQ(count_holes(once.pixels), 0u);
    EXPECT_EQ(postprocess_mask(once).pixels, once.pixels);
  }
}

TEST(Segmenter, OracleReturnsMaskUnchanged) {
  const auto img = blank_image(6, 6, 100);
  BinaryMask oracle = rect_mask(6, 6, 0, 0, 2, 2);
  oracle.set(5, 5, true);
  const auto out = segment(img, SegmenterConfig{}, oracle);
  EXPECT_EQ(out.pixels, oracle);
  EXPECT_EQ(out.source, MaskSource::OracleFile);
}

TEST(Segmenter, OracleErrors) {
  const auto img = blank_image(6, 6, 100);
  try {
    segment(img, SegmenterConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OracleMaskMissing);
  }
  try {
    segment(img, SegmenterConfig{}, BinaryMask(5, 6));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

TEST(Segmenter, BaselineThresholdsDarkRegion) {
  auto img = blank_image(30, 30, 240);
  for (int r = 10; r < 20; ++r)
    for (int c = 8; c < 22; ++c)
      for (int ch = 0; ch < 3; ++ch) img.pixels(r, c, ch) = 120;
  SegmenterConfig cfg;
  cfg.provider = SegmenterProvider::Baseline;
  const auto out = segment(img, cfg);
  EXPECT_EQ(out.source, MaskSource::BaselineSegmenter);
  EXPECT_EQ(out.pixels, rect_mask(30, 30, 10, 8, 10, 14));
}

TEST(Segmenter, BaselineClosingBridgesSmallGap) {
  auto img = blank_image(30, 30, 240);
  for (int r = 10; r < 20; ++r)
    for (int c = 5; c < 25; ++c)
      if (c != 15)
        for (int ch = 0; ch < 3; ++ch) img.pixels(r, c, ch) = 100;
  SegmenterConfig cfg;
  cfg.provider = SegmenterProvider::Baseline;
  const auto out = postprocess_mask(segment(img, cfg));
  EXPECT_EQ(foreground_components(out.pixels).sizes.size(), 1u);
  EXPECT_TRUE(out.pixels.at(15, 15));
}

TEST(Segmenter, BaselineBlankImageRejected) {
  SegmenterConfig cfg;
  cfg.provider = SegmenterProvider::Baseline;
  try {
    segment(blank_image(10, 10, 250), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyForeground);
  }
}
