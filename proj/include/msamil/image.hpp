#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msamil/error.hpp"

namespace msamil {

/// Dense row-major raster with interleaved channels.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int rows, int cols, int channels, T fill = T{})
      : rows_(rows), cols_(cols), channels_(channels),
        data_(static_cast<std::size_t>(rows) * cols * channels, fill) {
    if (rows < 0 || cols < 0 || channels < 1) {
      fail(ErrorKind::ShapeMismatch, "invalid raster shape");
    }
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }

  bool contains(int r, int c) const noexcept {
    return r >= 0 && c >= 0 && r < rows_ && c < cols_;
  }

  T& operator()(int r, int c, int ch = 0) noexcept {
    return data_[(static_cast<std::size_t>(r) * cols_ + c) * channels_ + ch];
  }
  const T& operator()(int r, int c, int ch = 0) const noexcept {
    return data_[(static_cast<std::size_t>(r) * cols_ + c) * channels_ + ch];
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool same_shape(int rows, int cols) const noexcept {
    return rows_ == rows && cols_ == cols;
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

using RgbRaster = Raster<std::uint8_t>;

/// Binary grid; stored values are 0 or 1.
class BinaryMask : public Raster<std::uint8_t> {
 public:
  BinaryMask() = default;
  BinaryMask(int rows, int cols, bool fill = false)
      : Raster<std::uint8_t>(rows, cols, 1, fill ? 1 : 0) {}

  bool at(int r, int c) const noexcept { return (*this)(r, c) != 0; }
  void set(int r, int c, bool v) noexcept { (*this)(r, c) = v ? 1 : 0; }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto v : data()) n += v != 0;
    return n;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

struct LesionImage {
  std::string id;
  RgbRaster pixels;  // H x W x 3
  double spacing_um = 0.25;

  int rows() const noexcept { return pixels.rows(); }
  int cols() const noexcept { return pixels.cols(); }
};

enum class MaskSource { OracleFile, BaselineSegmenter, FullImage };

struct RegionMask {
  BinaryMask pixels;
  MaskSource source = MaskSource::OracleFile;

  int rows() const noexcept { return pixels.rows(); }
  int cols() const noexcept { return pixels.cols(); }
};

inline BinaryMask full_mask(int rows, int cols) { return BinaryMask(rows, cols, true); }

}  // namespace msamil
