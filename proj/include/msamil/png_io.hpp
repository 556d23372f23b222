#pragma once

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "msamil/error.hpp"
#include "msamil/image.hpp"

namespace msamil::png {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline void on_error(png_structp ptr, png_const_charp msg) {
  auto* slot = static_cast<std::string*>(png_get_error_ptr(ptr));
  if (slot) *slot = msg;
  png_longjmp(ptr, 1);
}

inline void on_warning(png_structp, png_const_charp) {}

}  // namespace detail

/// Reads an 8-bit PNG and converts it to the requested channel count
/// (1 = gray, 3 = RGB, 4 = RGBA).
inline RgbRaster read(const std::filesystem::path& path, int channels) {
  if (!std::filesystem::exists(path)) {
    fail(ErrorKind::MissingFile, "no such file: " + path.string());
  }
  detail::FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) fail(ErrorKind::IoFailure, "cannot open " + path.string());

  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message,
                                           detail::on_error, detail::on_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::IoFailure, "libpng init failed");
  }

  RgbRaster out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::IoFailure, "bad png " + path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_packing(png);
  png_set_palette_to_rgb(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  const bool src_gray = (color & PNG_COLOR_MASK_COLOR) == 0;
  if (channels >= 3 && src_gray) png_set_gray_to_rgb(png);
  if (channels == 1 && !src_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  if (channels == 4) {
    png_set_add_alpha(png, 0xff, PNG_FILLER_AFTER);
  } else {
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int got = png_get_channels(png, info);
  if (got != channels) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::IoFailure, "unexpected channel layout in " + path.string());
  }
  out = RgbRaster(h, w, channels);
  rows.resize(h);
  for (int r = 0; r < h; ++r) rows[r] = &out(r, 0, 0);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

inline void write(const std::filesystem::path& path, const RgbRaster& image) {
  const int ch = image.channels();
  int color = 0;
  switch (ch) {
    case 1: color = PNG_COLOR_TYPE_GRAY; break;
    case 3: color = PNG_COLOR_TYPE_RGB; break;
    case 4: color = PNG_COLOR_TYPE_RGBA; break;
    default: fail(ErrorKind::IoFailure, "unsupported channel count");
  }
  detail::FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) fail(ErrorKind::IoFailure, "cannot write " + path.string());

  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message,
                                            detail::on_error, detail::on_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::IoFailure, "libpng init failed");
  }
  std::vector<png_bytep> rows(image.rows());
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::IoFailure, "png write failed for " + path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.cols(), image.rows(), 8, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < image.rows(); ++r) {
    rows[r] = const_cast<png_bytep>(&image(r, 0, 0));
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Masks on disk are single-channel, 0 = background, 255 = foreground.
/// Any nonzero value reads as foreground.
inline BinaryMask read_mask(const std::filesystem::path& path) {
  const RgbRaster gray = read(path, 1);
  BinaryMask mask(gray.rows(), gray.cols());
  for (int r = 0; r < gray.rows(); ++r)
    for (int c = 0; c < gray.cols(); ++c) mask.set(r, c, gray(r, c) != 0);
  return mask;
}

inline void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  RgbRaster gray(mask.rows(), mask.cols(), 1);
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c) gray(r, c) = mask.at(r, c) ? 255 : 0;
  write(path, gray);
}

}  // namespace msamil::png
