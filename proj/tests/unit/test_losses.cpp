// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "sdkd/errors.hpp"
#include "sdkd/losses.hpp"
#include "sdkd/optimizer.hpp"

namespace sdkd {
namespace {

TensorD uniform(std::size_t batch, std::size_t length, std::size_t vocab) {
  return TensorD::full({batch, length, vocab}, 1.0 / static_cast<double>(vocab));
}

TokenMatrix targets(std::vector<int> row, std::size_t valid) {
  auto m = TokenMatrix::from_rows({row}, 0);
  for (std::size_t t = 0; t < m.length; ++t) m.valid[t] = t < valid;
  return m;
}

TEST(NllLoss, ClosedForms) {
  const auto five = nll_loss(uniform(1, 5, 100), targets({4, 5, 6, 7, 8}, 5));
  EXPECT_NEAR(five.sum_value(), 5 * std::log(100.0), 1e-9);
  EXPECT_EQ(five.token_count, 5u);
  EXPECT_NEAR(five.sum_value(), 23.026, 1e-3);

  const auto masked = nll_loss(uniform(1, 3, 10), targets({4, 5, 6}, 0));
  EXPECT_EQ(masked.sum_value(), 0.0);
  EXPECT_EQ(masked.token_count, 0u);

  std::vector<double> one_hot(2 * 4, 0.0);
  one_hot[1] = one_hot[4 + 2] = 1.0;
  const auto perfect = nll_loss(TensorD({1, 2, 4}, one_hot), targets({1, 2}, 2));
  EXPECT_EQ(perfect.sum_value(), 0.0);
}

TEST(NllLoss, ZeroProbabilityClamped) {
  std::vector<double> p{1, 0, 0, 0};
  const auto loss = nll_loss(TensorD({1, 1, 4}, p), targets({2}, 1));
  EXPECT_EQ(loss.clamped, 1u);
  EXPECT_NEAR(loss.sum_value(), -std::log(kProbabilityFloor), 1e-9);
}

TEST(NllLoss, ShapeMismatch) { EXPECT_THROW(nll_loss(uniform(1, 3, 4), targets({1, 2}, 2)), DimensionError); }

TEST(PredictionImitation, ClosedForms) {
  const auto mask = targets({1}, 1);
  EXPECT_NEAR(prediction_imitation_loss(uniform(1, 1, 4), uniform(1, 1, 4), mask).sum_value(), std::log(4.0), 1e-12);
  const TensorD q({1, 1, 4}, {0, 1, 0, 0});
  const TensorD p({1, 1, 4}, {0.25, 0.5, 0.25, 0});
  EXPECT_NEAR(prediction_imitation_loss(q, p, mask).sum_value(), std::log(2.0), 1e-12);
  EXPECT_THROW(prediction_imitation_loss(uniform(1, 1, 4), uniform(1, 1, 5), mask), DimensionError);
}

TEST(PredictionImitation, GibbsInequality) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  const auto mask = targets({1}, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t v = 2 + trial % 9;
    std::vector<double> q(v), p(v);
    double sq = 0, sp = 0;
    for (std::size_t k = 0; k < v; ++k) sq += q[k] = u(rng), sp += p[k] = u(rng);
    double entropy = 0;
    for (std::size_t k = 0; k < v; ++k) {
      q[k] /= sq;
      p[k] /= sp;
      entropy -= q[k] * std::log(q[k]);
    }
    const TensorD tq({1, 1, v}, q), tp({1, 1, v}, p);
    EXPECT_GE(prediction_imitation_loss(tq, tp, mask).sum_value(), entropy - 1e-9);
    EXPECT_NEAR(prediction_imitation_loss(tq, tq, mask).sum_value(), entropy, 1e-9);
  }
}

TEST(PredictionImitation, TeacherReceivesNoGradient) {
  const TensorD q({1, 1, 2}, {0.3, 0.7}, true);
  const TensorD p({1, 1, 2}, {0.6, 0.4}, true);
  backward(prediction_imitation_loss(q, p, targets({1}, 1)).sum);
  EXPECT_FALSE(q.has_grad());
  ASSERT_TRUE(p.has_grad());
  EXPECT_NEAR(p.grad()[0], -0.3 / 0.6, 1e-12);
}

std::vector<TensorD> constant_layers(std::size_t layers, double value) {
  return std::vector<TensorD>(layers, TensorD::full({1, 2, 3}, value));
}

TEST(RepresentationImitation, ThresholdGate) {
  const auto mask = targets({1, 1}, 2);
  const auto base = constant_layers(2, 0.0);
  EXPECT_EQ(representation_imitation_loss(base, base, 0.01, mask).sum_value(), 0.0);
  const auto near = representation_imitation_loss(base, constant_layers(2, 0.05), 0.01, mask);
  EXPECT_EQ(near.sum_value(), 0.0);
  const auto far = representation_imitation_loss(base, constant_layers(2, 0.2), 0.01, mask);
  EXPECT_NEAR(far.sum_value(), 2 * 2 * 0.04, 1e-12);
  const auto one = representation_imitation_loss(base, constant_layers(2, 0.2), 0.01, targets({1, 1}, 1));
  EXPECT_NEAR(one.sum_value(), 2 * 0.04, 1e-12);
}

TEST(RepresentationImitation, Contracts) {
  const auto mask = targets({1, 1}, 2);
  EXPECT_THROW(representation_imitation_loss(constant_layers(2, 0), constant_layers(1, 0), 0.01, mask), ContractError);
  EXPECT_THROW(representation_imitation_loss(constant_layers(1, 0), constant_layers(1, 0), -1.0, mask), ContractError);
  std::vector<TensorD> wide{TensorD::zeros({1, 2, 4})};
  EXPECT_THROW(representation_imitation_loss(constant_layers(1, 0), wide, 0.01, mask), DimensionError);
}

TEST(CombinedLoss, Arithmetic) {
  EXPECT_DOUBLE_EQ(combined_loss(1.0, 0.5, 0.25, 2.0).total, 2.5);
  EXPECT_DOUBLE_EQ(combined_loss(1.0, 0.5, 0.25, 2.0, 0.4, 0.5).total, 2.7);
  EXPECT_EQ(combined_loss(1.7, 9.0, 3.0, 0.0).total, 1.7);
  const TensorD* no_lm = nullptr;
  const auto t = combine_loss_tensors(TensorD::scalar(1.0), TensorD::scalar(0.5), TensorD::scalar(0.25), 2.0, no_lm, 0.5);
  EXPECT_DOUBLE_EQ(t.item(), 2.5);
}

TEST(ClipGlobalNorm, ScalesToNorm) {
  std::vector<double> g{3, 4};
  const double norm = clip_global_norm<double>({std::span<double>(g)}, 2.0);
  EXPECT_DOUBLE_EQ(norm, 5.0);
  EXPECT_NEAR(g[0], 1.2, 1e-15);
  EXPECT_NEAR(g[1], 1.6, 1e-15);
  std::vector<double> small{0.3, 0.4};
  clip_global_norm<double>({std::span<double>(small)}, 2.0);
  EXPECT_EQ(small[0], 0.3);
}

TEST(Adam, FirstStepClosedForm) {
  std::vector<double> p{0.5};
  const std::vector<double> g{1.0};
  AdamState state;
  adam_step_with_clip<double>({std::span<double>(p)}, {std::span<const double>(g)}, state, AdamConfig{});
  EXPECT_NEAR(p[0] - 0.5, -0.001, 1e-9);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, ZeroGradientIsFixpoint) {
  std::vector<double> p{0.5, -2};
  const std::vector<double> g{0, 0};
  AdamState state;
  for (int i = 0; i < 3; ++i)
    adam_step_with_clip<double>({std::span<double>(p)}, {std::span<const double>(g)}, state, AdamConfig{});
  EXPECT_EQ(p, (std::vector<double>{0.5, -2}));
  EXPECT_EQ(state.m[0], (std::vector<double>{0, 0}));
  EXPECT_EQ(state.v[0], (std::vector<double>{0, 0}));
}

TEST(Adam, NonFiniteGradientAbortsBeforeUpdate) {
  std::vector<double> p{0.5, 1};
  const std::vector<double> g{1, std::numeric_limits<double>::quiet_NaN()};
  AdamState state;
  EXPECT_THROW(adam_step_with_clip<double>({std::span<double>(p)}, {std::span<const double>(g)}, state, AdamConfig{}),
               NumericError);
  EXPECT_EQ(p, (std::vector<double>{0.5, 1}));
  EXPECT_EQ(state.step, 0u);
}

TEST(Adam, ReportsClipFactor) {
  std::vector<double> p{0, 0};
  const std::vector<double> g{3, 4};
  AdamState state;
  const auto r = adam_step_with_clip<double>({std::span<double>(p)}, {std::span<const double>(g)}, state, AdamConfig{});
  EXPECT_DOUBLE_EQ(r.grad_norm, 5.0);
  EXPECT_DOUBLE_EQ(r.clip_factor, 0.4);
}

TEST(Adam, FrozenTensorsUntouched) {
  ParameterSet<double> params;
  params.add("a", TensorD({2}, {1, 2}, true));
  params.add("b", TensorD({1}, {3}, true));
  backward(sum(add(mul(params.at("a"), params.at("a")), reshape(params.at("b"), {1}))));
  AdamState state;
  adam_step_with_clip(params, {"b"}, state, AdamConfig{});
  EXPECT_NE(params.at("a").values()[0], 1.0);
  EXPECT_EQ(params.at("b").values()[0], 3.0);
}

}  // namespace
}  // namespace sdkd
