#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "msamil/core.hpp"
#include "msamil/error.hpp"
#include "msamil/network.hpp"
#include "msamil/parallel.hpp"
#include "msamil/rng.hpp"

namespace msamil {

/// The instance classifier f: tile pixels -> probability of the positive
/// class. Parameters are stored in single precision, matching the
/// checkpoint format.
struct ClassifierModel {
  Architecture arch;
  std::vector<float> params;
  std::uint64_t seed = 0;

  friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 8;
  double learning_rate = 1e-3;
  double lr_decay = 0.3;
  std::vector<int> decay_epochs{15, 25};
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 0) fail(ErrorKind::InvalidConfig, "epochs must be >= 0");
    if (batch_size < 1) fail(ErrorKind::InvalidConfig, "batch_size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      fail(ErrorKind::InvalidConfig, "learning_rate must be finite and >= 0");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0))
      fail(ErrorKind::InvalidConfig, "lr_decay must be in (0, 1]");
  }

  /// Learning rate for a 1-based epoch: the base rate times lr_decay for
  /// every scheduled decay epoch already completed.
  double rate_for_epoch(int epoch) const {
    double lr = learning_rate;
    for (int d : decay_epochs)
      if (epoch > d) lr *= lr_decay;
    return lr;
  }
};

inline ClassifierModel init_model(std::uint64_t seed, const Architecture& arch) {
  arch.validate();
  ClassifierModel model{arch, std::vector<float>(arch.parameter_count(), 0.0f), seed};
  Rng rng(mix_seed(seed, 0x1417));
  auto fill = [&](std::size_t offset, std::size_t count, int fan_in) {
    const double bound = std::sqrt(6.0 / fan_in);
    for (std::size_t k = 0; k < count; ++k)
      model.params[offset + k] = static_cast<float>(rng.uniform(-bound, bound));
  };
  fill(0, arch.conv1_weights(), arch.in_channels * 9);
  fill(arch.off_w2(), arch.conv2_weights(), arch.conv1_channels * 9);
  fill(arch.off_wd(), static_cast<std::size_t>(arch.dense_inputs()), arch.dense_inputs());
  return model;
}

/// Channel-major copy of an s x s window scaled to [0, 1].
inline std::vector<float> tile_tensor(const LesionImage& image, Origin origin, int size) {
  const RgbRaster& px = image.pixels;
  if (origin.row < 0 || origin.col < 0 || origin.row + size > px.rows() ||
      origin.col + size > px.cols())
    fail(ErrorKind::ShapeMismatch, "tile footprint outside image " + image.id);
  const int ch = px.channels();
  std::vector<float> out(static_cast<std::size_t>(ch) * size * size);
  constexpr float scale = 1.0f / 255.0f;
  for (int c = 0; c < ch; ++c)
    for (int r = 0; r < size; ++r)
      for (int k = 0; k < size; ++k)
        out[(static_cast<std::size_t>(c) * size + r) * size + k] =
            px(origin.row + r, origin.col + k, c) * scale;
  return out;
}

inline void check_input(const ClassifierModel& model, std::size_t length) {
  if (length != model.arch.input_length())
    fail(ErrorKind::ArchitectureMismatch,
         "input of " + std::to_string(length) + " values does not match a " +
             std::to_string(model.arch.input_size) + "x" + std::to_string(model.arch.input_size) +
             " model");
}

inline double predict(const ClassifierModel& model, std::span<const float> input,
                      Workspace<float>& ws) {
  check_input(model, input.size());
  const float z = forward_logit<float>(model.arch, model.params, input, ws);
  return sigmoid(static_cast<double>(z));
}

inline double predict(const ClassifierModel& model, std::span<const float> input) {
  Workspace<float> ws(model.arch);
  return predict(model, input, ws);
}

inline double predict_tile(const ClassifierModel& model, const LesionImage& image, Origin origin,
                           int size, Workspace<float>& ws) {
  if (size != model.arch.input_size)
    fail(ErrorKind::ArchitectureMismatch, "tile size " + std::to_string(size) +
                                              " does not match model input " +
                                              std::to_string(model.arch.input_size));
  const auto input = tile_tensor(image, origin, size);
  return predict(model, input, ws);
}

/// P_i for one bag plus the index of its most probable instance.
struct BagPrediction {
  int bag = 0;
  std::vector<double> probs;
  int argmax = 0;
};

/// First index of the maximum (ties resolve to the smallest index).
inline int argmax_first(std::span<const double> values) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(values.size()); ++j)
    if (values[j] > values[best]) best = j;
  return best;
}

inline BagPrediction make_bag_prediction(int bag, std::vector<double> probs) {
  if (probs.empty()) fail(ErrorKind::EmptyBag, "bag " + std::to_string(bag) + " has no tiles");
  BagPrediction out{bag, std::move(probs), 0};
  out.argmax = argmax_first(out.probs);
  return out;
}

inline BagPrediction predict_bag(const ClassifierModel& model, const Bag& bag) {
  if (bag.tiles.empty())
    fail(ErrorKind::EmptyBag, "bag " + std::to_string(bag.index) + " has no tiles");
  Workspace<float> ws(model.arch);
  std::vector<double> probs;
  probs.reserve(bag.tiles.size());
  for (const auto& t : bag.tiles) probs.push_back(predict_tile(model, *bag.image, t.origin, t.size, ws));
  return make_bag_prediction(bag.index, std::move(probs));
}

inline std::vector<BagPrediction> predict_bags(const ClassifierModel& model,
                                               std::span<const Bag> bags, unsigned threads) {
  std::vector<BagPrediction> out(bags.size());
  parallel_for(bags.size(), threads, [&](std::size_t i) { out[i] = predict_bag(model, bags[i]); });
  return out;
}

inline constexpr double kLossClamp = 1e-7;

/// Binary cross-entropy with the prediction clamped to [1e-7, 1 - 1e-7].
inline double loss(double predicted, int target) {
  const double p = std::clamp(predicted, kLossClamp, 1.0 - kLossClamp);
  return target == 1 ? -std::log(p) : -std::log(1.0 - p);
}

/// Mean cross-entropy over a batch, the batch objective minimized by
/// train_epoch. Uniform weights.
inline double batch_loss(std::span<const double> predicted, std::span<const int> targets) {
  if (predicted.size() != targets.size() || predicted.empty())
    fail(ErrorKind::LengthMismatch, "batch_loss needs equal nonzero lengths");
  double sum = 0;
  for (std::size_t k = 0; k < predicted.size(); ++k) sum += loss(predicted[k], targets[k]);
  return sum / static_cast<double>(predicted.size());
}

/// Mean batch loss and its gradient with respect to every parameter, at
/// precision T. Used by training (float) and by gradient checks (double).
/// dL/dz = p - y is the derivative of the clamped loss wherever the clamp is
/// inactive.
template <typename T>
T batch_loss_and_gradient(const Architecture& arch, std::span<const T> params,
                          std::span<const std::vector<T>> inputs, std::span<const int> targets,
                          std::span<T> grad, Workspace<T>& ws, std::vector<double>* probs = nullptr) {
  std::fill(grad.begin(), grad.end(), T(0));
  const T inv = T(1) / static_cast<T>(inputs.size());
  double total = 0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const T z = forward_logit<T>(arch, params, inputs[k], ws);
    const double p = sigmoid(static_cast<double>(z));
    if (probs) probs->push_back(p);
    total += loss(p, targets[k]);
    backward_logit<T>(arch, params, inputs[k], static_cast<T>((p - targets[k])) * inv, ws, grad);
  }
  return static_cast<T>(total / static_cast<double>(inputs.size()));
}

/// Adaptive-moment optimizer state; persists across epochs.
struct AdamState {
  std::vector<double> m, v;
  std::int64_t steps = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

struct LabeledInput {
  std::vector<float> input;
  int label = 0;
};

struct EpochStats {
  double mean_loss = 0;
  double accuracy = 0;  // fraction of samples with (p > 0.5) == label, before each update
};

/// One pass of mini-batch descent over the samples, in an order shuffled
/// from (config.seed, epoch). Returns the mean per-sample loss.
inline EpochStats train_epoch(ClassifierModel& model, AdamState& adam,
                              std::span<const LabeledInput> samples, const TrainConfig& config,
                              int epoch) {
  config.validate();
  if (samples.empty()) fail(ErrorKind::EmptyTrainingSet, "no labeled instances to train on");
  const Architecture& arch = model.arch;
  const std::size_t n = model.params.size();
  if (adam.m.size() != n) adam = AdamState(n);
  for (const auto& s : samples) {
    check_input(model, s.input.size());
    if (s.label != 0 && s.label != 1) fail(ErrorKind::InvalidConfig, "labels must be 0 or 1");
  }

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(epoch) + 0x5eed));
  rng.shuffle(std::span<std::size_t>(order));

  const double lr = config.rate_for_epoch(epoch);
  Workspace<float> ws(arch);
  std::vector<float> grad(n);
  std::vector<std::vector<float>> batch;
  std::vector<int> targets;
  std::vector<double> probs;
  double loss_sum = 0;
  std::size_t correct = 0;

  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    const std::size_t stop = std::min(order.size(), start + config.batch_size);
    batch.clear();
    targets.clear();
    probs.clear();
    for (std::size_t k = start; k < stop; ++k) {
      batch.push_back(samples[order[k]].input);
      targets.push_back(samples[order[k]].label);
    }
    batch_loss_and_gradient<float>(arch, model.params, batch, targets, grad, ws, &probs);
    for (std::size_t k = 0; k < probs.size(); ++k) {
      loss_sum += loss(probs[k], targets[k]);
      correct += (probs[k] > 0.5) == (targets[k] == 1);
    }

    ++adam.steps;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(adam.steps));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(adam.steps));
    for (std::size_t p = 0; p < n; ++p) {
      const double g = grad[p];
      adam.m[p] = config.beta1 * adam.m[p] + (1.0 - config.beta1) * g;
      adam.v[p] = config.beta2 * adam.v[p] + (1.0 - config.beta2) * g * g;
      const double step = lr * (adam.m[p] / c1) / (std::sqrt(adam.v[p] / c2) + config.epsilon);
      model.params[p] = static_cast<float>(model.params[p] - step);
    }
  }
  const double count = static_cast<double>(samples.size());
  return {loss_sum / count, static_cast<double>(correct) / count};
}

// ---------------------------------------------------------------------------
// Checkpoints: "MSAMILCK", u32 version, five u32 architecture fields, u64
// seed, u64 parameter count, then little-endian IEEE-754 binary32 values.

inline constexpr std::array<char, 8> kCheckpointMagic{'M', 'S', 'A', 'M', 'I', 'L', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace ckpt_detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>(v >> (8 * k)));
}
inline void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<unsigned char>(v >> (8 * k)));
}

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  std::uint64_t take(int width) {
    if (pos_ + width > bytes_.size()) fail(ErrorKind::CorruptCheckpoint, "checkpoint truncated");
    std::uint64_t v = 0;
    for (int k = 0; k < width; ++k) v |= static_cast<std::uint64_t>(bytes_[pos_ + k]) << (8 * k);
    pos_ += width;
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::span<const unsigned char> rest() const { return bytes_.subspan(pos_); }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace ckpt_detail

inline std::vector<unsigned char> encode_checkpoint(const ClassifierModel& model) {
  using namespace ckpt_detail;
  std::vector<unsigned char> out(kCheckpointMagic.begin(), kCheckpointMagic.end());
  put_u32(out, kCheckpointVersion);
  const Architecture& a = model.arch;
  for (int v : {a.input_size, a.in_channels, a.conv1_channels, a.conv2_channels, a.kernel})
    put_u32(out, static_cast<std::uint32_t>(v));
  put_u64(out, model.seed);
  put_u64(out, model.params.size());
  for (float f : model.params) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
  }
  return out;
}

inline ClassifierModel decode_checkpoint(std::span<const unsigned char> bytes) {
  using namespace ckpt_detail;
  if (bytes.size() < kCheckpointMagic.size() ||
      !std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), bytes.begin()))
    fail(ErrorKind::CorruptCheckpoint, "bad checkpoint magic");
  Reader in(bytes.subspan(kCheckpointMagic.size()));
  const auto version = static_cast<std::uint32_t>(in.take(4));
  if (version != kCheckpointVersion)
    fail(ErrorKind::VersionMismatch, "checkpoint version " + std::to_string(version) +
                                         ", expected " + std::to_string(kCheckpointVersion));
  ClassifierModel model;
  model.arch.input_size = static_cast<int>(in.take(4));
  model.arch.in_channels = static_cast<int>(in.take(4));
  model.arch.conv1_channels = static_cast<int>(in.take(4));
  model.arch.conv2_channels = static_cast<int>(in.take(4));
  model.arch.kernel = static_cast<int>(in.take(4));
  model.seed = in.take(8);
  const std::uint64_t count = in.take(8);
  try {
    model.arch.validate();
  } catch (const Error& e) {
    fail(ErrorKind::CorruptCheckpoint, std::string("checkpoint architecture invalid: ") + e.what());
  }
  if (count != model.arch.parameter_count())
    fail(ErrorKind::CorruptCheckpoint, "parameter count does not match architecture");
  if (in.remaining() != count * 4)
    fail(ErrorKind::CorruptCheckpoint, "checkpoint payload size mismatch");
  model.params.resize(count);
  for (auto& f : model.params) {
    const auto bits = static_cast<std::uint32_t>(in.take(4));
    std::memcpy(&f, &bits, sizeof f);
    if (!std::isfinite(f)) fail(ErrorKind::CorruptCheckpoint, "non-finite parameter");
  }
  return model;
}

inline void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path.string());
}

inline ClassifierModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::MissingFile, "no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot read " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace msamil
