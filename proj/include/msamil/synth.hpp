#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "msamil/core.hpp"
#include "msamil/error.hpp"
#include "msamil/manifest.hpp"
#include "msamil/png_io.hpp"
#include "msamil/rng.hpp"

namespace msamil::synth {

/// Synthetic "glomerulus" images: a textured ellipse with a dark rim on a
/// light background. Positives carry spike motifs (alternating dark/light
/// radial strokes across the rim), each recorded as a box. Blob, texture,
/// noise and clutter are drawn from streams that do not depend on the
/// label, so the motifs are the only class signal.
struct GenConfig {
  std::uint64_t seed = 42;
  int n_pos = 100;
  int n_neg = 100;
  int image_size = 128;
  double blob_radius_min = 0.30;  // fraction of image_size
  double blob_radius_max = 0.42;
  int spikes_min = 3;
  int spikes_max = 8;
  int motif_min = 12;  // px
  int motif_max = 16;
  double noise = 8.0;  // intensity std-dev
  int box_size = 16;
  /// Chance that an image shows a fragment of a neighboring structure in a
  /// corner, complete with rim and spike-like serrations. Same for both
  /// classes; it lies outside the region mask.
  double clutter_probability = 0.5;
  /// Rim decoys per image (both classes): one or two dark radial strokes,
  /// spike-like but without the alternating pattern.
  int decoys_min = 0;
  int decoys_max = 0;
  /// Opacity of the motif strokes in (0, 1].
  double motif_contrast = 1.0;
  /// Record boxes but leave the motif pixels unpainted (learnability check).
  bool suppress_motifs = false;

  void validate() const {
    if (n_pos < 0 || n_neg < 0) fail(ErrorKind::InvalidConfig, "counts must be >= 0");
    if (image_size < 16) fail(ErrorKind::InvalidConfig, "image_size must be >= 16");
    if (!(blob_radius_min > 0 && blob_radius_min <= blob_radius_max && blob_radius_max < 0.5))
      fail(ErrorKind::InvalidConfig, "blob radius range must satisfy 0 < min <= max < 0.5");
    if (spikes_min < 1 || spikes_min > spikes_max)
      fail(ErrorKind::InvalidConfig, "spike count range invalid");
    if (motif_min < 3 || motif_min > motif_max)
      fail(ErrorKind::InvalidConfig, "motif size range invalid");
    if (motif_max > box_size || box_size > image_size / 4)
      fail(ErrorKind::InvalidConfig, "need motif size <= box size <= image_size / 4");
    if (noise < 0) fail(ErrorKind::InvalidConfig, "noise must be >= 0");
    if (decoys_min < 0 || decoys_min > decoys_max)
      fail(ErrorKind::InvalidConfig, "decoy count range invalid");
    if (!(motif_contrast > 0 && motif_contrast <= 1))
      fail(ErrorKind::InvalidConfig, "motif_contrast must be in (0, 1]");
    if (!(clutter_probability >= 0 && clutter_probability <= 1))
      fail(ErrorKind::InvalidConfig, "clutter_probability must be in [0, 1]");
  }
};

struct Ellipse {
  double cy = 0, cx = 0;  // center (row, col)
  double a = 1, b = 1;    // semi-axes along the rotated u and v directions
  double angle = 0;

  // Normalized radius: < 1 inside, 1 on the boundary.
  double rho(double y, double x) const {
    const double dy = y - cy, dx = x - cx;
    const double u = dx * std::cos(angle) + dy * std::sin(angle);
    const double v = -dx * std::sin(angle) + dy * std::cos(angle);
    return std::sqrt((u / a) * (u / a) + (v / b) * (v / b));
  }

  // Approximate signed distance in pixels (negative inside).
  double distance(double y, double x) const {
    const double dy = y - cy, dx = x - cx;
    const double u = dx * std::cos(angle) + dy * std::sin(angle);
    const double v = -dx * std::sin(angle) + dy * std::cos(angle);
    const double r = std::hypot(u, v);
    if (r < 1e-9) return -std::min(a, b);
    const double cu = u / r, cv = v / r;
    const double radial = 1.0 / std::sqrt((cu / a) * (cu / a) + (cv / b) * (cv / b));
    return r - radial;
  }

  // Boundary point at parameter t and its outward unit normal, as (row, col).
  std::array<double, 4> boundary(double t) const {
    const double u = a * std::cos(t), v = b * std::sin(t);
    const double x = cx + u * std::cos(angle) - v * std::sin(angle);
    const double y = cy + u * std::sin(angle) + v * std::cos(angle);
    const double nu = std::cos(t) / a, nv = std::sin(t) / b;
    double nx = nu * std::cos(angle) - nv * std::sin(angle);
    double ny = nu * std::sin(angle) + nv * std::cos(angle);
    const double len = std::hypot(nx, ny);
    return {y, x, ny / len, nx / len};
  }
};

struct Spike {
  double row = 0, col = 0;    // center on the rim
  double nrow = 0, ncol = 0;  // outward normal
  int extent = 12;
  int strokes = 3;
  bool decoy = false;  // dark strokes only
};

struct SynthImage {
  LesionImage image;
  BinaryMask mask;
  BagLabel label = BagLabel::Negative;
  std::vector<BoxAnnotation> boxes;
  Ellipse blob;
  std::vector<Spike> spikes;
};

namespace detail {

using Rgb = std::array<double, 3>;

inline constexpr Rgb kBackground{236, 229, 233};
inline constexpr Rgb kInterior{188, 148, 184};
inline constexpr Rgb kRim{112, 72, 112};
inline constexpr Rgb kNucleus{150, 102, 152};
inline constexpr Rgb kDark{58, 28, 62};
inline constexpr Rgb kLight{250, 244, 250};

struct Canvas {
  int size;
  std::vector<Rgb> px;

  explicit Canvas(int n) : size(n), px(static_cast<std::size_t>(n) * n, kBackground) {}
  Rgb& at(int r, int c) { return px[static_cast<std::size_t>(r) * size + c]; }

  void blend(int r, int c, const Rgb& color, double w) {
    if (r < 0 || c < 0 || r >= size || c >= size || w <= 0) return;
    w = std::min(w, 1.0);
    auto& p = at(r, c);
    for (int k = 0; k < 3; ++k) p[k] = (1 - w) * p[k] + w * color[k];
  }

  // Anti-aliased thick segment.
  void segment(double r0, double c0, double r1, double c1, double half_width, const Rgb& color,
               double opacity = 1.0) {
    const int lo_r = static_cast<int>(std::floor(std::min(r0, r1) - half_width - 1));
    const int hi_r = static_cast<int>(std::ceil(std::max(r0, r1) + half_width + 1));
    const int lo_c = static_cast<int>(std::floor(std::min(c0, c1) - half_width - 1));
    const int hi_c = static_cast<int>(std::ceil(std::max(c0, c1) + half_width + 1));
    const double dr = r1 - r0, dc = c1 - c0;
    const double len2 = dr * dr + dc * dc;
    for (int r = lo_r; r <= hi_r; ++r)
      for (int c = lo_c; c <= hi_c; ++c) {
        double t = len2 > 0 ? ((r - r0) * dr + (c - c0) * dc) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double d = std::hypot(r - (r0 + t * dr), c - (c0 + t * dc));
        blend(r, c, color, opacity * std::min(1.0, half_width + 0.5 - d));
      }
  }
};

struct Texture {
  std::array<double, 12> coeff{};

  explicit Texture(Rng& rng) {
    for (int k = 0; k < 4; ++k) {
      coeff[3 * k] = rng.uniform(0.15, 0.45) * (rng.uniform() < 0.5 ? -1 : 1);
      coeff[3 * k + 1] = rng.uniform(0.15, 0.45) * (rng.uniform() < 0.5 ? -1 : 1);
      coeff[3 * k + 2] = rng.uniform(0, 6.283185307179586);
    }
  }

  double operator()(double y, double x) const {
    double t = 0;
    for (int k = 0; k < 4; ++k) t += std::sin(coeff[3 * k] * x + coeff[3 * k + 1] * y + coeff[3 * k + 2]);
    return t / 4.0;
  }
};

// Fills an ellipse-shaped structure: textured interior, nuclei and a rim.
inline void paint_structure(Canvas& canvas, const Ellipse& e, Rng& rng) {
  const Texture texture(rng);
  for (int r = 0; r < canvas.size; ++r)
    for (int c = 0; c < canvas.size; ++c) {
      const double d = e.distance(r, c);
      if (d > 2.0) continue;
      if (d <= 0.0) {
        const double t = 14.0 * texture(r, c);
        canvas.at(r, c) = {kInterior[0] + t, kInterior[1] + t, kInterior[2] + t};
      }
      canvas.blend(r, c, kRim, 1.4 + 0.5 - std::fabs(d));
    }
  const int nuclei = static_cast<int>(std::lround(e.a * e.b / 70.0));
  for (int k = 0; k < nuclei; ++k) {
    const double t = rng.uniform(0, 6.283185307179586);
    const double f = 0.8 * std::sqrt(rng.uniform());
    const double u = e.a * f * std::cos(t), v = e.b * f * std::sin(t);
    const double x = e.cx + u * std::cos(e.angle) - v * std::sin(e.angle);
    const double y = e.cy + u * std::sin(e.angle) + v * std::cos(e.angle);
    const double rad = rng.uniform(1.3, 2.4);
    for (int r = static_cast<int>(y - rad - 1); r <= static_cast<int>(y + rad + 1); ++r)
      for (int c = static_cast<int>(x - rad - 1); c <= static_cast<int>(x + rad + 1); ++c)
        canvas.blend(r, c, kNucleus, rad + 0.5 - std::hypot(r - y, c - x));
  }
}

inline void paint_spike(Canvas& canvas, const Spike& s, double contrast) {
  const double half = s.extent / 2.0;
  const double tr = -s.ncol, tc = s.nrow;  // tangent
  const double spacing = s.decoy ? 4.0 : static_cast<double>(s.extent) / s.strokes;
  for (int k = 0; k < s.strokes; ++k) {
    const double offset = (k - (s.strokes - 1) / 2.0) * spacing;
    const double br = s.row + offset * tr, bc = s.col + offset * tc;
    const bool dark = s.decoy || k % 2 == 0;
    canvas.segment(br - half * s.nrow, bc - half * s.ncol, br + half * s.nrow, bc + half * s.ncol,
                   dark ? 0.9 : 0.7, dark ? kDark : kLight, contrast);
  }
}

// Picks rim parameters at least `gap` pixels apart along the rim.
inline std::vector<double> rim_positions(const Ellipse& e, int count, double gap, double t_lo,
                                         double t_hi, Rng& rng,
                                         const std::vector<double>& avoid = {}) {
  std::vector<double> ts;
  for (int attempt = 0; attempt < 200 && static_cast<int>(ts.size()) < count; ++attempt) {
    const double t = rng.uniform(t_lo, t_hi);
    const auto p = e.boundary(t);
    bool ok = true;
    for (double o : avoid) {
      const auto q = e.boundary(o);
      if (std::hypot(p[0] - q[0], p[1] - q[1]) < gap) ok = false;
    }
    for (double o : ts) {
      const auto q = e.boundary(o);
      if (std::hypot(p[0] - q[0], p[1] - q[1]) < gap) ok = false;
    }
    if (ok) ts.push_back(t);
  }
  return ts;
}

inline Spike make_spike(const Ellipse& e, double t, const GenConfig& cfg, Rng& rng) {
  const auto p = e.boundary(t);
  Spike s;
  s.row = p[0];
  s.col = p[1];
  s.nrow = p[2];
  s.ncol = p[3];
  s.extent = rng.integer(cfg.motif_min, cfg.motif_max);
  s.strokes = rng.integer(3, 5);
  return s;
}

}  // namespace detail

/// Renders image `index` of the corpus. The label is an input; everything
/// except the motifs is drawn from label-independent streams.
inline SynthImage render(const GenConfig& cfg, int index, BagLabel label) {
  using namespace detail;
  const int n = cfg.image_size;
  Rng shape_rng(mix_seed(cfg.seed, 3 * static_cast<std::uint64_t>(index)));
  Rng spike_rng(mix_seed(cfg.seed, 3 * static_cast<std::uint64_t>(index) + 1));
  Rng noise_rng(mix_seed(cfg.seed, 3 * static_cast<std::uint64_t>(index) + 2));

  SynthImage out;
  out.label = label;
  Ellipse& blob = out.blob;
  blob.a = shape_rng.uniform(cfg.blob_radius_min, cfg.blob_radius_max) * n;
  blob.b = shape_rng.uniform(cfg.blob_radius_min, cfg.blob_radius_max) * n;
  blob.angle = shape_rng.uniform(0, 3.141592653589793);
  const double reach = std::max(blob.a, blob.b) + cfg.motif_max / 2.0 + 2.0;
  const double jitter = std::max(0.0, n / 2.0 - reach);
  blob.cy = (n - 1) / 2.0 + shape_rng.uniform(-jitter, jitter);
  blob.cx = (n - 1) / 2.0 + shape_rng.uniform(-jitter, jitter);

  Canvas canvas(n);
  paint_structure(canvas, blob, shape_rng);

  // Corner clutter, kept clear of the main structure.
  if (shape_rng.uniform() < cfg.clutter_probability) {
    const int first = shape_rng.integer(0, 3);
    const double radius = shape_rng.uniform(0.14, 0.19) * n;
    const double inset = shape_rng.uniform(2.0, 6.0);
    for (int k = 0; k < 4; ++k) {
      const int corner = (first + k) % 4;
      Ellipse frag;
      frag.a = frag.b = radius;
      frag.cy = corner < 2 ? -inset : n - 1 + inset;
      frag.cx = corner % 2 == 0 ? -inset : n - 1 + inset;
      bool clear = true;
      for (int s = 0; s < 64 && clear; ++s) {
        const double t = 6.283185307179586 * s / 64;
        const double y = frag.cy + (radius + cfg.motif_max / 2.0 + 3) * std::sin(t);
        const double x = frag.cx + (radius + cfg.motif_max / 2.0 + 3) * std::cos(t);
        if (blob.distance(y, x) < cfg.motif_max / 2.0 + 3) clear = false;
      }
      if (!clear) continue;
      paint_structure(canvas, frag, shape_rng);
      // Serrations on the arc facing the image interior.
      const double toward = std::atan2((n - 1) / 2.0 - frag.cy, (n - 1) / 2.0 - frag.cx);
      const int count = shape_rng.integer(1, 3);
      const auto ts = rim_positions(frag, count, cfg.motif_max, toward - 0.55, toward + 0.55, shape_rng);
      for (double t : ts) paint_spike(canvas, make_spike(frag, t, cfg, shape_rng), cfg.motif_contrast);
      break;
    }
  }

  std::vector<double> taken;
  if (cfg.decoys_max > 0) {
    const int count = shape_rng.integer(cfg.decoys_min, cfg.decoys_max);
    taken = rim_positions(blob, count, cfg.motif_max + 2.0, 0, 6.283185307179586, shape_rng);
    for (double t : taken) {
      Spike d = make_spike(blob, t, cfg, shape_rng);
      d.decoy = true;
      d.strokes = shape_rng.integer(1, 2);
      paint_spike(canvas, d, cfg.motif_contrast);
    }
  }

  if (label == BagLabel::Positive) {
    const int count = spike_rng.integer(cfg.spikes_min, cfg.spikes_max);
    const auto ts =
        rim_positions(blob, count, cfg.motif_max + 2.0, 0, 6.283185307179586, spike_rng, taken);
    for (double t : ts) {
      Spike s = make_spike(blob, t, cfg, spike_rng);
      if (!cfg.suppress_motifs) paint_spike(canvas, s, cfg.motif_contrast);
      const int half = cfg.box_size / 2;
      BoxAnnotation box{std::clamp(static_cast<int>(std::lround(s.row)) - half, 0, n - cfg.box_size),
                        std::clamp(static_cast<int>(std::lround(s.col)) - half, 0, n - cfg.box_size),
                        cfg.box_size, cfg.box_size};
      out.boxes.push_back(box);
      out.spikes.push_back(s);
    }
  }

  out.image.id = "img" + std::to_string(index);
  out.image.pixels = RgbRaster(n, n, 3);
  out.mask = BinaryMask(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const auto& p = canvas.at(r, c);
      for (int k = 0; k < 3; ++k) {
        const double v = p[k] + cfg.noise * noise_rng.normal();
        out.image.pixels(r, c, k) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
      out.mask.set(r, c, blob.rho(r, c) <= 1.0);
    }
  return out;
}

/// Label of image `index`: positives and negatives alternate until one
/// class runs out.
inline BagLabel label_for(const GenConfig& cfg, int index) {
  const int paired = 2 * std::min(cfg.n_pos, cfg.n_neg);
  if (index < paired) return index % 2 == 0 ? BagLabel::Positive : BagLabel::Negative;
  return cfg.n_pos > cfg.n_neg ? BagLabel::Positive : BagLabel::Negative;
}

/// Writes images/, masks/ and manifest.csv under out_dir; returns the
/// manifest path.
inline std::filesystem::path generate(const GenConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  std::filesystem::create_directories(out_dir / "masks", ec);
  if (ec) fail(ErrorKind::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<ManifestRow> rows;
  const int total = cfg.n_pos + cfg.n_neg;
  for (int i = 0; i < total; ++i) {
    const SynthImage img = render(cfg, i, label_for(cfg, i));
    ManifestRow row;
    row.id = img.image.id;
    row.image_path = "images/" + row.id + ".png";
    row.mask_path = "masks/" + row.id + ".png";
    row.label = img.label;
    row.boxes = img.boxes;
    png::write(out_dir / row.image_path, img.image.pixels);
    png::write_mask(out_dir / row.mask_path, img.mask);
    rows.push_back(std::move(row));
  }
  const auto manifest = out_dir / "manifest.csv";
  write_manifest(manifest, rows);
  return manifest;
}

struct Summary {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t boxes = 0;
  double mean_blob_area = 0;  // mean foreground pixels over rows with a mask file
};

inline Summary describe(const std::filesystem::path& manifest) {
  Summary s;
  std::size_t masks = 0;
  double area = 0;
  for (const auto& row : read_manifest(manifest)) {
    (row.label == BagLabel::Positive ? s.positives : s.negatives)++;
    s.boxes += row.boxes.size();
    if (!row.mask_path.empty()) {
      area += static_cast<double>(png::read_mask(resolve(manifest, row.mask_path)).count());
      ++masks;
    }
  }
  s.mean_blob_area = masks ? area / static_cast<double>(masks) : 0.0;
  return s;
}

}  // namespace msamil::synth
