#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "support.hpp"

using namespace msamil;

TEST(Network, ParameterLayoutForDefaultTile) {
  Architecture a;
  a.input_size = 16;
  EXPECT_EQ(a.conv1_weights(), 8u * 3 * 9);
  EXPECT_EQ(a.conv2_weights(), 16u * 8 * 9);
  EXPECT_EQ(a.dense_inputs(), 16 * 4 * 4);
  EXPECT_EQ(a.parameter_count(), 216u + 8 + 1152 + 16 + 256 + 1);
  a.input_size = 50;
  EXPECT_EQ(a.dense_inputs(), 16 * 12 * 12);  // 50 -> 25 -> 12
}

TEST(Network, ForwardMatchesReferenceLoops) {
  for (int size : {4, 7, 16, 21}) {
    Architecture arch;
    arch.input_size = size;
    const auto model = init_model(11 + size, arch);
    Rng rng(size);
    std::vector<double> x(arch.input_length());
    for (auto& v : x) v = rng.uniform();
    std::vector<double> p(model.params.begin(), model.params.end());
    Workspace<double> ws(arch);
    EXPECT_NEAR(forward_logit<double>(arch, p, x, ws), msamil::testing::reference_logit(arch, p, x), 1e-12)
        << "size " << size;
  }
}

TEST(Network, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = msamil::testing::check_gradient(seed, 8, 3);
    EXPECT_LT(r.relative_error, 1e-4) << "seed " << seed;
  }
}

TEST(Network, SigmoidIsStable) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(800.0), 1.0, 1e-15);
  EXPECT_NEAR(sigmoid(-800.0), 0.0, 1e-15);
  EXPECT_NEAR(sigmoid(2.0) + sigmoid(-2.0), 1.0, 1e-15);
}

TEST(Network, InvalidArchitectureRejected) {
  Architecture a;
  a.input_size = 3;
  EXPECT_THROW(a.validate(), Error);
  a = Architecture{};
  a.kernel = 5;
  EXPECT_THROW(a.validate(), Error);
}
