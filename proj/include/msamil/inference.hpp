#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include "msamil/classifier.hpp"
#include "msamil/core.hpp"
#include "msamil/error.hpp"
#include "msamil/tiler.hpp"

namespace msamil {

/// Sliding-window probabilities over an image. Cells whose window fails the
/// mask inclusion test are absent.
struct ProbabilityMatrix {
  Lattice lattice;
  std::vector<std::optional<double>> cells;  // row-major, lattice.rows x lattice.cols

  int rows() const noexcept { return lattice.rows; }
  int cols() const noexcept { return lattice.cols; }
  const std::optional<double>& at(int a, int b) const { return cells[static_cast<std::size_t>(a) * cols() + b]; }
  std::optional<double>& at(int a, int b) { return cells[static_cast<std::size_t>(a) * cols() + b]; }
  Origin origin(int a, int b) const noexcept { return lattice.origin(a, b); }

  std::size_t present() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(),
                                                  [](const auto& c) { return c.has_value(); }));
  }
};

struct WindowConfig {
  int stride = 0;  // 0 means window_size / 2
  double inclusion_fraction = 0.5;
};

inline ProbabilityMatrix slide_windows(const ClassifierModel& model, const LesionImage& image,
                                       const RegionMask& mask, int window_size,
                                       const WindowConfig& config = {}) {
  if (window_size != model.arch.input_size)
    fail(ErrorKind::ArchitectureMismatch, "window size " + std::to_string(window_size) +
                                              " does not match model input " +
                                              std::to_string(model.arch.input_size));
  if (!mask.pixels.same_shape(image.rows(), image.cols()))
    fail(ErrorKind::ShapeMismatch, "mask shape differs from image " + image.id);
  TilerConfig tiler{window_size, config.stride, config.inclusion_fraction};
  tiler.validate_for(image.rows(), image.cols());

  ProbabilityMatrix m;
  m.lattice = make_lattice(image.rows(), image.cols(), window_size, tiler.effective_step());
  m.cells.assign(static_cast<std::size_t>(m.rows()) * m.cols(), std::nullopt);
  const MaskIntegral integral(mask.pixels);
  Workspace<float> ws(model.arch);
  for (int a = 0; a < m.rows(); ++a)
    for (int b = 0; b < m.cols(); ++b) {
      const Origin o = m.origin(a, b);
      if (!window_included(integral, o, window_size, config.inclusion_fraction)) continue;
      m.at(a, b) = predict_tile(model, image, o, window_size, ws);
    }
  return m;
}

/// Maximum present window probability; 0 when no window is present.
inline double image_score(const ProbabilityMatrix& m) {
  double best = 0.0;
  for (const auto& c : m.cells)
    if (c) best = std::max(best, *c);
  return best;
}

/// Positive iff some window probability strictly exceeds the threshold.
inline BagLabel classify_image(const ProbabilityMatrix& m, double threshold = 0.5) {
  for (const auto& c : m.cells)
    if (c && *c > threshold) return BagLabel::Positive;
  return BagLabel::Negative;
}

enum class Fusion { Mean, Max };

struct Heatmap {
  RgbRaster color;              // H x W x 3
  Raster<double> alpha;         // H x W, 0 where nothing is drawn
  Raster<double> probability;   // fused per-pixel probability (NaN where uncovered)

  /// Alpha-composite over the original image.
  RgbRaster composite(const LesionImage& image) const {
    RgbRaster out = image.pixels;
    for (int r = 0; r < out.rows(); ++r)
      for (int c = 0; c < out.cols(); ++c) {
        const double a = alpha(r, c);
        if (a <= 0.0) continue;
        for (int ch = 0; ch < 3; ++ch)
          out(r, c, ch) = static_cast<std::uint8_t>(
              std::lround(a * color(r, c, ch) + (1.0 - a) * image.pixels(r, c, ch)));
      }
    return out;
  }

  /// Color plus an 8-bit alpha channel.
  RgbRaster rgba() const {
    RgbRaster out(color.rows(), color.cols(), 4);
    for (int r = 0; r < out.rows(); ++r)
      for (int c = 0; c < out.cols(); ++c) {
        for (int ch = 0; ch < 3; ++ch) out(r, c, ch) = color(r, c, ch);
        out(r, c, 3) = static_cast<std::uint8_t>(std::lround(255.0 * alpha(r, c)));
      }
    return out;
  }
};

/// Hue runs linearly from 240 degrees (p = 0, blue) to 0 degrees (p = 1,
/// red) at full saturation and value.
inline double probability_hue(double p) { return 240.0 * (1.0 - std::clamp(p, 0.0, 1.0)); }

inline std::array<double, 3> hsv_to_rgb(double hue_deg) {
  const double h = std::fmod(hue_deg, 360.0) / 60.0;
  const double x = 1.0 - std::fabs(std::fmod(h, 2.0) - 1.0);
  switch (static_cast<int>(h)) {
    case 0: return {1, x, 0};
    case 1: return {x, 1, 0};
    case 2: return {0, 1, x};
    case 3: return {0, x, 1};
    case 4: return {x, 0, 1};
    default: return {1, 0, x};
  }
}

inline Heatmap render_heatmap(const ProbabilityMatrix& m, const LesionImage& image,
                              const RegionMask& mask, double alpha, Fusion fusion = Fusion::Mean) {
  const int H = image.rows(), W = image.cols();
  if (!mask.pixels.same_shape(H, W)) fail(ErrorKind::ShapeMismatch, "mask shape differs from image");
  if (m.rows() > 0 && m.cols() > 0) {
    const Origin last = m.origin(m.rows() - 1, m.cols() - 1);
    if (last.row + m.lattice.size > H || last.col + m.lattice.size > W)
      fail(ErrorKind::ShapeMismatch, "probability matrix does not fit the image");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::InvalidConfig, "alpha must be in [0, 1]");

  Raster<double> sum(H, W, 1, 0.0), peak(H, W, 1, -1.0);
  Raster<int> hits(H, W, 1, 0);
  const int s = m.lattice.size;
  for (int a = 0; a < m.rows(); ++a)
    for (int b = 0; b < m.cols(); ++b) {
      const auto& cell = m.at(a, b);
      if (!cell) continue;
      const Origin o = m.origin(a, b);
      for (int r = o.row; r < o.row + s; ++r)
        for (int c = o.col; c < o.col + s; ++c) {
          sum(r, c) += *cell;
          peak(r, c) = std::max(peak(r, c), *cell);
          ++hits(r, c);
        }
    }

  Heatmap out{RgbRaster(H, W, 3), Raster<double>(H, W, 1, 0.0),
              Raster<double>(H, W, 1, std::nan(""))};
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) {
      if (hits(r, c) == 0 || !mask.pixels.at(r, c)) continue;
      const double p = fusion == Fusion::Mean ? sum(r, c) / hits(r, c) : peak(r, c);
      const auto rgb = hsv_to_rgb(probability_hue(p));
      for (int ch = 0; ch < 3; ++ch)
        out.color(r, c, ch) = static_cast<std::uint8_t>(std::lround(255.0 * rgb[ch]));
      out.alpha(r, c) = alpha;
      out.probability(r, c) = p;
    }
  return out;
}

/// row, col, origin_r, origin_c, p for every present cell.
inline void write_matrix_csv(const ProbabilityMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot write " + path.string());
  out << "row,col,origin_r,origin_c,p\n";
  out.precision(17);
  for (int a = 0; a < m.rows(); ++a)
    for (int b = 0; b < m.cols(); ++b) {
      const auto& cell = m.at(a, b);
      if (!cell) continue;
      const Origin o = m.origin(a, b);
      out << a << ',' << b << ',' << o.row << ',' << o.col << ',' << *cell << '\n';
    }
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path.string());
}

}  // namespace msamil
