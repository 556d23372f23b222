#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include <unistd.h>

#include "msamil/msamil.hpp"

namespace msamil::testing {

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("msamil_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline BinaryMask rect_mask(int rows, int cols, int r0, int c0, int h, int w) {
  BinaryMask m(rows, cols);
  for (int r = r0; r < r0 + h; ++r)
    for (int c = c0; c < c0 + w; ++c) m.set(r, c, true);
  return m;
}

inline std::shared_ptr<LesionImage> noise_image(int rows, int cols, std::uint64_t seed) {
  auto img = std::make_shared<LesionImage>();
  img->id = "img" + std::to_string(seed);
  img->pixels = RgbRaster(rows, cols, 3);
  Rng rng(seed);
  for (auto& v : img->pixels.data()) v = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

inline Bag make_bag(int index, std::shared_ptr<const LesionImage> image, BinaryMask mask,
                    BagLabel label, std::vector<BoxAnnotation> boxes = {}) {
  Bag bag;
  bag.index = index;
  bag.image = std::move(image);
  bag.mask = std::make_shared<RegionMask>(RegionMask{std::move(mask), MaskSource::OracleFile});
  bag.label = label;
  bag.boxes = std::move(boxes);
  return bag;
}

}  // namespace msamil::testing
