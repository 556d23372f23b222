#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"

using namespace msamil;
using msamil::testing::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

synth::GenConfig small(int n) {
  synth::GenConfig g;
  g.n_pos = n;
  g.n_neg = n;
  return g;
}

}  // namespace

TEST(Synth, StructureOfSmallCorpus) {
  TempDir dir("synth");
  const auto manifest = synth::generate(small(5), dir.path());
  const auto rows = read_manifest(manifest);
  ASSERT_EQ(rows.size(), 10u);
  int with_boxes = 0;
  for (const auto& r : rows) {
    if (!r.boxes.empty()) ++with_boxes;
    if (r.label == BagLabel::Negative) EXPECT_TRUE(r.boxes.empty());
    else EXPECT_FALSE(r.boxes.empty());
    EXPECT_TRUE(std::filesystem::exists(dir / r.image_path));
    EXPECT_TRUE(std::filesystem::exists(dir / r.mask_path));
  }
  EXPECT_EQ(with_boxes, 5);
}

TEST(Synth, GenerationIsByteIdentical) {
  TempDir a("synth"), b("synth");
  synth::generate(small(3), a.path());
  synth::generate(small(3), b.path());
  EXPECT_EQ(slurp(a / "manifest.csv"), slurp(b / "manifest.csv"));
  for (const auto& row : read_manifest(a / "manifest.csv")) {
    EXPECT_EQ(slurp(a / row.image_path), slurp(b / row.image_path));
    EXPECT_EQ(slurp(a / row.mask_path), slurp(b / row.mask_path));
  }
  synth::GenConfig other = small(3);
  other.seed = 43;
  EXPECT_NE(synth::render(other, 0, BagLabel::Positive).image.pixels,
            synth::render(small(3), 0, BagLabel::Positive).image.pixels);
}

TEST(Synth, BoxesLieInBoundaryBand) {
  const auto cfg = small(20);
  for (int i = 0; i < 40; ++i) {
    const auto img = synth::render(cfg, i, synth::label_for(cfg, i));
    const BinaryMask& m = img.mask;
    for (const auto& box : img.boxes) {
      ASSERT_TRUE(box.inside(m.rows(), m.cols()));
      // Some pixel of the footprint lies within motif_max of the mask edge.
      bool near_edge = false;
      for (int r = box.row; r < box.row + box.height && !near_edge; ++r)
        for (int c = box.col; c < box.col + box.width && !near_edge; ++c)
          for (int dr = -cfg.motif_max; dr <= cfg.motif_max && !near_edge; ++dr)
            for (int dc = -cfg.motif_max; dc <= cfg.motif_max && !near_edge; ++dc) {
              const int y = r + dr, x = c + dc;
              if (y < 0 || x < 0 || y >= m.rows() || x >= m.cols()) continue;
              if (m.at(y, x) != m.at(r, c)) near_edge = true;
            }
      EXPECT_TRUE(near_edge) << "image " << i;
    }
  }
}

TEST(Synth, MasksAreSingleHoleFreeBlobs) {
  const auto cfg = small(5);
  for (int i = 0; i < 10; ++i) {
    const auto img = synth::render(cfg, i, synth::label_for(cfg, i));
    EXPECT_EQ(foreground_components(img.mask).sizes.size(), 1u);
    EXPECT_EQ(count_holes(img.mask), 0u);
  }
}

TEST(Synth, OnlyMotifsDifferBetweenClasses) {
  // Same index, opposite label: identical outside the motif footprints.
  auto cfg = small(2);
  const auto pos = synth::render(cfg, 0, BagLabel::Positive);
  const auto neg = synth::render(cfg, 0, BagLabel::Negative);
  EXPECT_EQ(pos.mask, neg.mask);
  BinaryMask covered(pos.mask.rows(), pos.mask.cols());
  for (const auto& s : pos.spikes) {
    const int pad = s.extent + 4;
    for (int r = static_cast<int>(s.row) - pad; r <= static_cast<int>(s.row) + pad; ++r)
      for (int c = static_cast<int>(s.col) - pad; c <= static_cast<int>(s.col) + pad; ++c)
        if (covered.contains(r, c)) covered.set(r, c, true);
  }
  std::size_t differing_outside = 0;
  for (int r = 0; r < covered.rows(); ++r)
    for (int c = 0; c < covered.cols(); ++c)
      for (int ch = 0; ch < 3; ++ch)
        if (!covered.at(r, c) && pos.image.pixels(r, c, ch) != neg.image.pixels(r, c, ch))
          ++differing_outside;
  EXPECT_EQ(differing_outside, 0u);
}

TEST(Synth, DescribeMatchesDirectoryScan) {
  TempDir dir("synth");
  auto cfg = small(4);
  cfg.n_neg = 3;
  const auto manifest = synth::generate(cfg, dir.path());
  const auto s = synth::describe(manifest);
  EXPECT_EQ(s.positives, 4u);
  EXPECT_EQ(s.negatives, 3u);
  // Independent walk over the mask directory.
  std::size_t files = 0;
  double area = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "masks")) {
    ++files;
    area += static_cast<double>(png::read_mask(e.path()).count());
  }
  EXPECT_EQ(files, 7u);
  EXPECT_NEAR(s.mean_blob_area, area / files, 1e-9);
  std::size_t boxes = 0;
  for (const auto& r : read_manifest(manifest)) boxes += r.boxes.size();
  EXPECT_EQ(s.boxes, boxes);
}

TEST(Synth, InvalidConfigRejected) {
  auto cfg = small(1);
  cfg.spikes_min = 5;
  cfg.spikes_max = 2;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = small(1);
  cfg.motif_contrast = 0;
  EXPECT_THROW(cfg.validate(), Error);
}
