#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "support.hpp"

using namespace msamil;
using msamil::testing::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Report, RoundTripWithoutRoc) {
  TempDir dir("report");
  const auto r = derive_metrics({1, 0, 0, 1});
  save_report(r, dir / "r.json");
  EXPECT_EQ(load_report(dir / "r.json"), r);
}

TEST(Report, RoundTripWithRoc) {
  TempDir dir("report");
  auto r = derive_metrics({3, 1, 2, 4});
  const std::vector<double> s{0.91, 0.13, 0.77, 0.4, 0.6, 0.05, 0.33, 0.88, 0.2, 0.51};
  std::vector<BagLabel> y;
  for (int k = 0; k < 10; ++k) y.push_back(k % 2 ? BagLabel::Negative : BagLabel::Positive);
  r.roc = roc_auc(s, y);
  save_report(r, dir / "r.json");
  const auto back = load_report(dir / "r.json");
  EXPECT_EQ(back, r);
  EXPECT_TRUE(back.roc->thresholds.empty());
}

TEST(Report, FourDecimalScalars) {
  TempDir dir("report");
  save_report(derive_metrics({114, 2, 8, 128}), dir / "r.json");
  const auto text = slurp(dir / "r.json");
  EXPECT_NE(text.find("\"f1\": 0.9580"), std::string::npos) << text;
  EXPECT_NE(text.find("\"precision\": 0.9828"), std::string::npos);
  EXPECT_NE(text.find("\"recall\": 0.9344"), std::string::npos);
  EXPECT_NE(text.find("\"accuracy\": 0.9603"), std::string::npos);
  EXPECT_NE(text.find("\"tp\": 114"), std::string::npos);
}

TEST(Report, NanAucRejected) {
  auto r = derive_metrics({1, 0, 0, 1});
  r.roc = RocCurve{{{0, 0}, {1, 1}}, {}, std::nan("")};
  try {
    encode_report(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Serialization);
  }
}

TEST(Report, InconsistentFileRejected) {
  const std::string bad =
      R"({"tp": 1, "fp": 0, "fn": 0, "tn": 1, "precision": 0.5, "recall": 1.0, "f1": 1.0, "accuracy": 1.0})";
  EXPECT_THROW(decode_report(bad), Error);
  EXPECT_THROW(decode_report("{not json"), Error);
  EXPECT_THROW(load_report("/nonexistent/report.json"), Error);
}
