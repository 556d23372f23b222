#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msamil/core.hpp"
#include "msamil/error.hpp"
#include "msamil/png_io.hpp"
#include "msamil/segmenter.hpp"
#include "msamil/tiler.hpp"

namespace msamil {

/// One bag in a manifest. Paths are stored as written; relative paths are
/// resolved against the manifest's directory.
struct ManifestRow {
  std::string id;
  std::string image_path;
  std::string mask_path;  // empty: the segmenter produces the mask
  BagLabel label = BagLabel::Negative;
  std::vector<BoxAnnotation> boxes;
  int line = 0;

  friend bool operator==(const ManifestRow& a, const ManifestRow& b) {
    return a.id == b.id && a.image_path == b.image_path && a.mask_path == b.mask_path &&
           a.label == b.label && a.boxes == b.boxes;
  }
};

inline constexpr std::string_view kManifestHeader = "id,image_path,mask_path,label,boxes";

namespace manifest_detail {

[[noreturn]] inline void malformed(int line, const std::string& what) {
  fail(ErrorKind::MalformedManifest, "line " + std::to_string(line) + ": " + what);
}

// RFC 4180-style fields: commas separate, double quotes protect commas and
// escape themselves by doubling.
inline std::vector<std::string> split_csv(std::string_view line, int lineno) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          fields.back() += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back() += ch;
    }
  }
  if (quoted) malformed(lineno, "unterminated quote");
  return fields;
}

inline int parse_int(std::string_view text, int lineno) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    malformed(lineno, "expected an integer, got '" + std::string(text) + "'");
  return v;
}

inline std::vector<BoxAnnotation> parse_boxes(std::string_view text, int lineno) {
  std::vector<BoxAnnotation> boxes;
  while (!text.empty()) {
    const auto semi = text.find(';');
    const std::string_view item = text.substr(0, semi);
    text = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);
    if (item.find_first_not_of(' ') == std::string_view::npos) continue;
    int parts[4];
    std::string_view rest = item;
    for (int k = 0; k < 4; ++k) {
      const auto comma = rest.find(',');
      if ((k < 3) == (comma == std::string_view::npos))
        malformed(lineno, "box must be r,c,h,w: '" + std::string(item) + "'");
      parts[k] = parse_int(rest.substr(0, comma), lineno);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    if (parts[2] <= 0 || parts[3] <= 0) malformed(lineno, "box height and width must be positive");
    boxes.push_back({parts[0], parts[1], parts[2], parts[3]});
  }
  return boxes;
}

inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace manifest_detail

inline std::vector<ManifestRow> parse_manifest(std::istream& in) {
  using namespace manifest_detail;
  std::vector<ManifestRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (lineno == 1 && line == kManifestHeader) continue;
    auto fields = split_csv(line, lineno);
    if (fields.size() < 4 || fields.size() > 5)
      malformed(lineno, "expected 4 or 5 fields, got " + std::to_string(fields.size()));
    ManifestRow row;
    row.line = lineno;
    row.id = fields[0];
    row.image_path = fields[1];
    row.mask_path = fields[2];
    if (row.id.empty()) malformed(lineno, "empty id");
    if (row.image_path.empty()) malformed(lineno, "empty image path");
    if (fields[3] == "pos") row.label = BagLabel::Positive;
    else if (fields[3] == "neg") row.label = BagLabel::Negative;
    else malformed(lineno, "label must be pos or neg, got '" + fields[3] + "'");
    if (fields.size() == 5) row.boxes = parse_boxes(fields[4], lineno);
    if (row.label == BagLabel::Negative && !row.boxes.empty())
      malformed(lineno, "negative bags cannot carry boxes");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::MissingFile, "no such file: " + path.string());
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoFailure, "cannot read " + path.string());
  return parse_manifest(in);
}

inline void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
  using manifest_detail::quote;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot write " + path.string());
  out << kManifestHeader << '\n';
  for (const auto& r : rows) {
    std::string boxes;
    for (std::size_t k = 0; k < r.boxes.size(); ++k) {
      const auto& b = r.boxes[k];
      if (k) boxes += ';';
      boxes += std::to_string(b.row) + ',' + std::to_string(b.col) + ',' +
               std::to_string(b.height) + ',' + std::to_string(b.width);
    }
    out << quote(r.id) << ',' << quote(r.image_path) << ',' << quote(r.mask_path) << ','
        << (r.label == BagLabel::Positive ? "pos" : "neg") << ',' << quote(boxes) << '\n';
  }
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path.string());
}

inline std::filesystem::path resolve(const std::filesystem::path& manifest, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : manifest.parent_path() / path;
}

struct CorpusOptions {
  SegmenterConfig segmenter;
  TilerConfig tiler;
  /// false: every bag uses a full-image mask and no segmentation runs.
  bool use_mask = true;
  /// false: bags are loaded without tiles (inference only needs images and masks).
  bool tile = true;
};

/// Fills each bag's weak and reinforced tiles.
inline void tile_corpus(TrainingCorpus& corpus, const TilerConfig& tiler) {
  for (Bag& bag : corpus.bags) {
    bag.tiles = partition_tiles(bag, tiler);
    bag.reinforced = bag.label == BagLabel::Positive ? extract_reinforced_tiles(bag, tiler)
                                                     : std::vector<Tile>{};
  }
}

/// Reads images and masks listed in a manifest. Bags keep manifest order and
/// are indexed from 0. Rows without a mask path (or every row, with the
/// baseline provider) are segmented; every mask is post-processed.
inline TrainingCorpus load_corpus(const std::filesystem::path& manifest_path,
                                  const CorpusOptions& options = {}) {
  using manifest_detail::malformed;
  options.segmenter.validate();
  options.tiler.validate();
  const auto rows = read_manifest(manifest_path);
  TrainingCorpus corpus;
  corpus.bags.reserve(rows.size());
  for (const auto& row : rows) {
    auto image = std::make_shared<LesionImage>();
    image->id = row.id;
    image->pixels = png::read(resolve(manifest_path, row.image_path), 3);
    const int H = image->rows(), W = image->cols();
    if (H < options.tiler.tile_size || W < options.tiler.tile_size)
      fail(ErrorKind::ShapeMismatch, "image " + row.id + " is smaller than the tile size");
    for (const auto& box : row.boxes)
      if (!box.inside(H, W)) malformed(row.line, "box exceeds bounds of image " + row.id);

    RegionMask mask;
    if (!options.use_mask) {
      mask = RegionMask{full_mask(H, W), MaskSource::FullImage};
    } else {
      std::optional<BinaryMask> oracle;
      SegmenterConfig seg = options.segmenter;
      if (!row.mask_path.empty() && seg.provider == SegmenterProvider::Oracle) {
        oracle = png::read_mask(resolve(manifest_path, row.mask_path));
        if (!oracle->same_shape(H, W))
          fail(ErrorKind::ShapeMismatch, "mask shape differs from image " + row.id);
      } else {
        seg.provider = SegmenterProvider::Baseline;
      }
      mask = postprocess_mask(segment(*image, seg, oracle));
    }

    Bag bag;
    bag.index = static_cast<int>(corpus.bags.size());
    bag.image = std::move(image);
    bag.mask = std::make_shared<RegionMask>(std::move(mask));
    bag.label = row.label;
    bag.boxes = row.boxes;
    corpus.bags.push_back(std::move(bag));
  }
  if (options.tile) tile_corpus(corpus, options.tiler);
  return corpus;
}

}  // namespace msamil
