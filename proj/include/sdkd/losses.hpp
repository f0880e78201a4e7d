// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training objectives. Every term is a masked sum over target positions;
// callers divide by the token count for the per-token mean.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sdkd/model.hpp"
#include "sdkd/tensor.hpp"

namespace sdkd {

// Probabilities at or below this value are clamped before the log.
inline constexpr double kProbabilityFloor = 1e-12;

template <typename T>
struct LossTerm {
  Tensor<T> sum;                // shape {1}
  std::size_t token_count = 0;  // unmasked positions
  std::size_t clamped = 0;      // gold probabilities hit the floor

  double sum_value() const { return static_cast<double>(sum.item()); }
  double mean_value() const { return token_count ? sum_value() / static_cast<double>(token_count) : 0.0; }
};

// (batch, length) tensor of 1 for valid positions and 0 for padding.
template <typename T>
Tensor<T> mask_tensor(const TokenMatrix& mask);

// -sum log p(gold) over unmasked positions of `distributions` (B, T, V).
template <typename T>
LossTerm<T> nll_loss(const Tensor<T>& distributions, const TokenMatrix& targets);

// -sum_i sum_k q(k) log p(k); the teacher distributions are read as
// constants, so no gradient reaches the teacher.
template <typename T>
LossTerm<T> prediction_imitation_loss(const Tensor<T>& teacher_distributions, const Tensor<T>& student_distributions,
                                      const TokenMatrix& mask);

// Per (position, layer): phi = mean squared feature difference; counts phi
// when phi >= alpha and contributes exactly 0 otherwise.
template <typename T>
LossTerm<T> representation_imitation_loss(const std::vector<Tensor<T>>& teacher_hiddens,
                                          const std::vector<Tensor<T>>& student_hiddens, double alpha,
                                          const TokenMatrix& mask);

struct LossBreakdown {
  double nll = 0;
  double nll_sum = 0;
  double il_prediction = 0;
  double il_representation = 0;
  std::optional<double> lm_prediction;
  double total = 0;
  std::size_t token_count = 0;
};

LossBreakdown combined_loss(double nll, double il_prediction, double il_representation, double lambda1,
                            std::optional<double> lm_prediction = std::nullopt, double lambda_lm = 0.5);

// Tensor form of the same combination, used for differentiation.
template <typename T>
Tensor<T> combine_loss_tensors(const Tensor<T>& nll, const Tensor<T>& il_prediction,
                               const Tensor<T>& il_representation, T lambda1, const Tensor<T>* lm_prediction,
                               T lambda_lm);

}  // namespace sdkd
