#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "msamil/error.hpp"
#include "msamil/metrics.hpp"

namespace msamil {

namespace report_detail {

inline std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace report_detail

/// Report JSON with keys tp, fp, fn, tn, precision, recall, f1, accuracy,
/// auc, roc. Scalar metrics are printed at four decimals; ROC points are
/// printed exactly. auc is null when no ROC curve was computed.
inline std::string encode_report(const MetricsReport& r) {
  using namespace report_detail;
  for (double v : {r.precision, r.recall, r.f1, r.accuracy})
    if (!std::isfinite(v)) fail(ErrorKind::Serialization, "report metrics must be finite");
  if (r.roc) {
    if (!std::isfinite(r.roc->auc)) fail(ErrorKind::Serialization, "report auc must be finite");
    for (const auto& p : r.roc->points)
      if (!std::isfinite(p.fpr) || !std::isfinite(p.tpr))
        fail(ErrorKind::Serialization, "ROC points must be finite");
  }
  std::ostringstream out;
  out << "{\n";
  out << "  \"tp\": " << r.counts.tp << ",\n";
  out << "  \"fp\": " << r.counts.fp << ",\n";
  out << "  \"fn\": " << r.counts.fn << ",\n";
  out << "  \"tn\": " << r.counts.tn << ",\n";
  out << "  \"precision\": " << fixed4(r.precision) << ",\n";
  out << "  \"recall\": " << fixed4(r.recall) << ",\n";
  out << "  \"f1\": " << fixed4(r.f1) << ",\n";
  out << "  \"accuracy\": " << fixed4(r.accuracy) << ",\n";
  out << "  \"auc\": " << (r.roc ? fixed4(r.roc->auc) : std::string("null")) << ",\n";
  out << "  \"roc\": [";
  if (r.roc) {
    for (std::size_t k = 0; k < r.roc->points.size(); ++k) {
      const auto& p = r.roc->points[k];
      out << (k ? ", " : "") << '[' << exact(p.fpr) << ", " << exact(p.tpr) << ']';
    }
  }
  out << "]\n}\n";
  return out.str();
}

/// Parses a report. Derived metrics are recomputed from the counts (and
/// auc from the ROC points) and must agree with the printed values to
/// within rounding.
inline MetricsReport decode_report(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::Serialization, std::string("report is not valid JSON: ") + e.what());
  }
  try {
    ConfusionCounts c{j.at("tp").get<std::int64_t>(), j.at("fp").get<std::int64_t>(),
                      j.at("fn").get<std::int64_t>(), j.at("tn").get<std::int64_t>()};
    MetricsReport r = derive_metrics(c);
    auto check = [&](const char* key, double expect) {
      if (std::fabs(j.at(key).get<double>() - expect) > 5e-5)
        fail(ErrorKind::Serialization, std::string("report field ") + key + " disagrees with counts");
    };
    check("precision", r.precision);
    check("recall", r.recall);
    check("f1", r.f1);
    check("accuracy", r.accuracy);
    if (!j.at("auc").is_null()) {
      RocCurve roc;
      for (const auto& p : j.at("roc")) {
        if (p.size() != 2) fail(ErrorKind::Serialization, "ROC entries must be [fpr, tpr]");
        roc.points.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      roc.auc = trapezoid_area(roc.points);
      check("auc", roc.auc);
      r.roc = std::move(roc);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Serialization, std::string("malformed report: ") + e.what());
  }
}

inline void save_report(const MetricsReport& report, const std::filesystem::path& path) {
  const std::string text = encode_report(report);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path.string());
}

inline MetricsReport load_report(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::MissingFile, "no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return decode_report(buf.str());
}

}  // namespace msamil
