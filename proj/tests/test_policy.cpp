#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "evomt/errors.hpp"
#include "evomt/policy.hpp"
#include "evomt/rng.hpp"

using namespace evomt;

TEST_CASE("architecture bookkeeping") {
  Architecture arch;
  arch.layer_sizes = {4, 16, 16, 8, 2};
  CHECK(arch.n_weight_layers() == 4);
  CHECK(arch.layer_param_count(0) == 4 * 16 + 16);
  CHECK(arch.layer_param_count(3) == 8 * 2 + 2);
  CHECK(arch.parameter_count() == (4 * 16 + 16) + (16 * 16 + 16) + (16 * 8 + 8) + (8 * 2 + 2));

  const Architecture def = default_architecture(6, 3);
  CHECK(def.layer_sizes == std::vector<int>{6, 16, 16, 8, 3});
  CHECK(def.activation == Architecture::Activation::ReLU);

  Architecture bad;
  bad.layer_sizes = {4, 2};  // no hidden layer
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad.layer_sizes = {4, 0, 2};
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("forward: zero weights give zero output") {
  Architecture arch;
  arch.layer_sizes = {3, 4, 2};
  const std::vector<double> weights(static_cast<std::size_t>(arch.parameter_count()), 0.0);
  const std::vector<double> obs = {0.3, -1.2, 0.7};
  const auto out = forward(arch, weights, obs);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
}

TEST_CASE("forward: hand-computed 2-2-2 oracle") {
  // Identity first layer with zero biases; ReLU passes non-negative inputs
  // through, so the output is exactly the second layer's linear map.
  Architecture arch;
  arch.layer_sizes = {2, 2, 2};
  arch.activation = Architecture::Activation::ReLU;
  const std::vector<double> weights = {
      1.0, 0.0, 0.0, 1.0,  // W1 rows (identity)
      0.0, 0.0,            // b1
      2.0, 3.0, 4.0, 5.0,  // W2 rows
      0.0, 0.0,            // b2
  };
  const std::vector<double> obs = {0.5, 1.5};
  const auto out = forward(arch, weights, obs);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == doctest::Approx(2.0 * 0.5 + 3.0 * 1.5));
  CHECK(out[1] == doctest::Approx(4.0 * 0.5 + 5.0 * 1.5));
}

TEST_CASE("forward: ReLU clips negatives between layers but not at the output") {
  Architecture arch;
  arch.layer_sizes = {1, 1, 1};
  arch.activation = Architecture::Activation::ReLU;
  // W1 = -1 (so hidden pre-activation is negative), W2 = 1, output bias -3.
  const std::vector<double> weights = {-1.0, 0.0, 1.0, -3.0};
  const auto out = forward(arch, weights, std::vector<double>{2.0});
  REQUIRE(out.size() == 1);
  CHECK(out[0] == doctest::Approx(-3.0));  // hidden ReLU(−2)=0, output 0·1−3
}

TEST_CASE("forward: tanh activation option") {
  Architecture arch;
  arch.layer_sizes = {1, 1, 1};
  arch.activation = Architecture::Activation::Tanh;
  const std::vector<double> weights = {2.0, 0.0, 1.0, 0.0};
  const auto out = forward(arch, weights, std::vector<double>{1.0});
  CHECK(out[0] == doctest::Approx(std::tanh(2.0)));
}

TEST_CASE("forward: purity on repeat calls") {
  Architecture arch;
  arch.layer_sizes = {4, 8, 3};
  Rng rng(5);
  std::vector<double> weights(static_cast<std::size_t>(arch.parameter_count()));
  for (auto& w : weights) w = rng.uniform(-1.0, 1.0);
  const std::vector<double> obs = {0.1, -0.4, 0.9, 2.0};
  const auto out1 = forward(arch, weights, obs);
  const auto out2 = forward(arch, weights, obs);
  CHECK(out1 == out2);
}

TEST_CASE("forward: dimension mismatches raise usage errors") {
  Architecture arch;
  arch.layer_sizes = {3, 4, 2};
  const std::vector<double> weights(static_cast<std::size_t>(arch.parameter_count()), 0.1);
  CHECK_THROWS_AS(forward(arch, weights, std::vector<double>{1.0, 2.0}), UsageError);
  const std::vector<double> short_weights(5, 0.1);
  CHECK_THROWS_AS(forward(arch, short_weights, std::vector<double>{1.0, 2.0, 3.0}), UsageError);
}

TEST_CASE("act: argmax with lowest-index tie break") {
  Architecture arch;
  arch.layer_sizes = {2, 2, 2};
  // Identity hidden layer; output layer picks out the observation directly.
  std::vector<double> weights = {1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0};
  CHECK(act(arch, weights, std::vector<double>{0.1, 0.9}) == 1);
  CHECK(act(arch, weights, std::vector<double>{0.9, 0.1}) == 0);
  CHECK(act(arch, weights, std::vector<double>{0.4, 0.4}) == 0);  // tie → lowest

  const std::vector<double> zeros(weights.size(), 0.0);
  CHECK(act(arch, zeros, std::vector<double>{3.0, -1.0}) == 0);  // all-equal outputs
}

TEST_CASE("act: positively scaling the final layer preserves the decision") {
  Architecture arch;
  arch.layer_sizes = {3, 5, 4};
  const int last = arch.n_weight_layers() - 1;
  const int last_params = arch.layer_param_count(last);
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> weights(static_cast<std::size_t>(arch.parameter_count()));
    for (auto& w : weights) w = rng.uniform(-2.0, 2.0);
    std::vector<double> scaled = weights;
    const double c = rng.uniform(0.1, 5.0);
    for (std::size_t i = scaled.size() - static_cast<std::size_t>(last_params);
         i < scaled.size(); ++i)
      scaled[i] *= c;
    const std::vector<double> obs = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                     rng.uniform(-1.0, 1.0)};
    CHECK(act(arch, weights, obs) == act(arch, scaled, obs));
  }
}
