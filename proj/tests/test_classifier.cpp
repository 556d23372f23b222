#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "support.hpp"

using namespace msamil;
using msamil::testing::noise_image;
using msamil::testing::TempDir;

namespace {

Architecture small_arch(int size = 8) {
  Architecture a;
  a.input_size = size;
  return a;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidConfig;
}

// Bright tiles are class 1, dark tiles class 0, with noise.
std::vector<LabeledInput> toy_samples(const Architecture& a, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledInput> out;
  for (int k = 0; k < n; ++k) {
    LabeledInput s;
    s.label = k % 2;
    s.input.resize(a.input_length());
    for (auto& v : s.input)
      v = static_cast<float>((s.label ? 0.7 : 0.3) + rng.uniform(-0.2, 0.2));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST(Classifier, ZeroParametersPredictOneHalf) {
  auto model = init_model(1, small_arch());
  std::fill(model.params.begin(), model.params.end(), 0.0f);
  std::vector<float> x(model.arch.input_length(), 0.3f);
  EXPECT_DOUBLE_EQ(predict(model, x), 0.5);
}

TEST(Classifier, LossValues) {
  EXPECT_NEAR(loss(0.5, 1), std::log(2.0), 1e-15);
  EXPECT_NEAR(loss(0.5, 0), std::log(2.0), 1e-15);
  EXPECT_NEAR(loss(0.9, 1), -std::log(0.9), 1e-15);
  EXPECT_NEAR(loss(0.9, 0), -std::log(0.1), 1e-12);
  // Clamp keeps saturated predictions finite.
  EXPECT_NEAR(loss(0.0, 1), -std::log(1e-7), 1e-9);
  EXPECT_NEAR(loss(1.0, 0), -std::log(1e-7), 1e-6);
  const std::vector<double> p{0.5, 0.9};
  const std::vector<int> y{1, 0};
  EXPECT_NEAR(batch_loss(p, y), (std::log(2.0) - std::log(0.1)) / 2, 1e-12);
}

TEST(Classifier, InitIsDeterministicAndBounded) {
  const auto a = init_model(5, small_arch(16));
  const auto b = init_model(5, small_arch(16));
  const auto c = init_model(6, small_arch(16));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.params, c.params);
  const Architecture& arch = a.arch;
  const double bound1 = std::sqrt(6.0 / 27);
  for (std::size_t k = 0; k < arch.conv1_weights(); ++k) EXPECT_LE(std::fabs(a.params[k]), bound1);
  for (std::size_t k = arch.off_b1(); k < arch.off_w2(); ++k) EXPECT_EQ(a.params[k], 0.0f);
  EXPECT_EQ(a.params[arch.off_bd()], 0.0f);
}

TEST(Classifier, LearningRateSchedule) {
  TrainConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.rate_for_epoch(1), 1e-3);
  EXPECT_DOUBLE_EQ(cfg.rate_for_epoch(15), 1e-3);
  EXPECT_DOUBLE_EQ(cfg.rate_for_epoch(16), 1e-3 * 0.3);
  EXPECT_DOUBLE_EQ(cfg.rate_for_epoch(25), 1e-3 * 0.3);
  EXPECT_NEAR(cfg.rate_for_epoch(26), 1e-3 * 0.09, 1e-18);
}

TEST(Classifier, TileTensorIsChannelMajorAndScaled) {
  LesionImage img{"t", RgbRaster(4, 4, 3)};
  img.pixels(1, 2, 0) = 255;
  img.pixels(1, 2, 2) = 51;
  const auto t = tile_tensor(img, {1, 1}, 2);
  ASSERT_EQ(t.size(), 12u);
  EXPECT_FLOAT_EQ(t[1], 1.0f);        // channel 0, (0, 1)
  EXPECT_FLOAT_EQ(t[8 + 1], 0.2f);    // channel 2, (0, 1)
  EXPECT_EQ(kind_of([&] { tile_tensor(img, {3, 3}, 2); }), ErrorKind::ShapeMismatch);
}

TEST(Classifier, ArchitectureMismatchOnWrongTileSize) {
  const auto model = init_model(1, small_arch(8));
  auto img = noise_image(32, 32, 1);
  Workspace<float> ws(model.arch);
  EXPECT_EQ(kind_of([&] { predict_tile(model, *img, {0, 0}, 16, ws); }),
            ErrorKind::ArchitectureMismatch);
  std::vector<float> x(10);
  EXPECT_EQ(kind_of([&] { predict(model, x); }), ErrorKind::ArchitectureMismatch);
}

TEST(Classifier, ArgmaxTakesFirstMaximum) {
  const std::vector<double> p{0.2, 0.7, 0.7, 0.1};
  EXPECT_EQ(argmax_first(p), 1);
  EXPECT_EQ(make_bag_prediction(3, p).argmax, 1);
  EXPECT_EQ(kind_of([] { make_bag_prediction(0, {}); }), ErrorKind::EmptyBag);
}

TEST(Classifier, TrainingReducesLossOnSeparableToy) {
  auto model = init_model(3, small_arch());
  const auto samples = toy_samples(model.arch, 32, 9);
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.decay_epochs = {};
  AdamState adam;
  const double first = train_epoch(model, adam, samples, cfg, 1).mean_loss;
  double last = first;
  for (int e = 2; e <= 200; ++e) last = train_epoch(model, adam, samples, cfg, e).mean_loss;
  EXPECT_LT(last, first / 10) << "first " << first << " last " << last;
}

TEST(Classifier, ZeroLearningRateLeavesParametersUnchanged) {
  auto model = init_model(4, small_arch());
  const auto before = model.params;
  TrainConfig cfg;
  cfg.learning_rate = 0;
  AdamState adam;
  train_epoch(model, adam, toy_samples(model.arch, 10, 2), cfg, 1);
  EXPECT_EQ(model.params, before);
  EXPECT_EQ(adam.steps, 2);  // ceil(10 / 8) batches
}

TEST(Classifier, TrainingIsDeterministic) {
  const auto samples = toy_samples(small_arch(), 20, 5);
  auto run = [&] {
    auto m = init_model(8, small_arch());
    AdamState adam;
    TrainConfig cfg;
    for (int e = 1; e <= 3; ++e) train_epoch(m, adam, samples, cfg, e);
    return m;
  };
  EXPECT_EQ(run(), run());
}

TEST(Classifier, EmptyTrainingSetRejected) {
  auto model = init_model(1, small_arch());
  AdamState adam;
  EXPECT_EQ(kind_of([&] { train_epoch(model, adam, {}, TrainConfig{}, 1); }),
            ErrorKind::EmptyTrainingSet);
}

TEST(Classifier, CheckpointRoundTrip) {
  TempDir dir("ckpt");
  const auto model = init_model(77, small_arch(16));
  save_model(model, dir / "m.bin");
  EXPECT_EQ(load_model(dir / "m.bin"), model);
  const auto bytes = encode_checkpoint(model);
  EXPECT_EQ(bytes.size(), 8u + 4 + 5 * 4 + 8 + 8 + 4 * model.params.size());
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "MSAMILCK");
}

TEST(Classifier, CheckpointCorruptionDetected) {
  const auto bytes = encode_checkpoint(init_model(1, small_arch()));
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_EQ(kind_of([&] { decode_checkpoint(truncated); }), ErrorKind::CorruptCheckpoint);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(kind_of([&] { decode_checkpoint(magic); }), ErrorKind::CorruptCheckpoint);
  auto version = bytes;
  version[8] = 2;
  EXPECT_EQ(kind_of([&] { decode_checkpoint(version); }), ErrorKind::VersionMismatch);
  auto header_only = bytes;
  header_only.resize(10);
  EXPECT_EQ(kind_of([&] { decode_checkpoint(header_only); }), ErrorKind::CorruptCheckpoint);
  EXPECT_EQ(kind_of([] { load_model("/nonexistent/model.bin"); }), ErrorKind::MissingFile);
}
