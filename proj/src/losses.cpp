// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/losses.hpp"

#include "sdkd/errors.hpp"

namespace sdkd {

namespace {

void check_aligned(const Shape& dists, const TokenMatrix& mask, const char* what) {
  if (dists.size() != 3 || dists[0] != mask.batch || dists[1] != mask.length) {
    throw DimensionError(std::string(what) + ": distributions " + shape_to_string(dists) + " do not align with (" +
                         std::to_string(mask.batch) + ", " + std::to_string(mask.length) + ") targets");
  }
}

std::size_t count_valid(const TokenMatrix& mask) {
  std::size_t n = 0;
  for (auto v : mask.valid) n += v != 0;
  return n;
}

}  // namespace

template <typename T>
Tensor<T> mask_tensor(const TokenMatrix& mask) {
  std::vector<T> values(mask.valid.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = mask.valid[i] ? T(1) : T(0);
  return Tensor<T>({mask.batch, mask.length}, std::move(values));
}

template <typename T>
LossTerm<T> nll_loss(const Tensor<T>& distributions, const TokenMatrix& targets) {
  check_aligned(distributions.shape(), targets, "nll_loss");
  LossTerm<T> term;
  term.token_count = count_valid(targets);
  const auto gold = pick(distributions, std::span<const int>(targets.ids));
  for (std::size_t i = 0; i < gold.numel(); ++i)
    if (targets.valid[i] && static_cast<double>(gold.at(i)) <= kProbabilityFloor) ++term.clamped;
  const auto logp = log(gold, T(kProbabilityFloor));
  term.sum = scale(sum(mul(logp, mask_tensor<T>(targets))), T(-1));
  return term;
}

template <typename T>
LossTerm<T> prediction_imitation_loss(const Tensor<T>& teacher_distributions, const Tensor<T>& student_distributions,
                                      const TokenMatrix& mask) {
  if (teacher_distributions.shape() != student_distributions.shape()) {
    throw DimensionError("prediction_imitation_loss: teacher " + shape_to_string(teacher_distributions.shape()) +
                         " vs student " + shape_to_string(student_distributions.shape()));
  }
  check_aligned(student_distributions.shape(), mask, "prediction_imitation_loss");
  const std::size_t vocab = student_distributions.dim(2);
  std::vector<T> weights(teacher_distributions.values().begin(), teacher_distributions.values().end());
  for (std::size_t r = 0; r < mask.valid.size(); ++r)
    if (!mask.valid[r])
      for (std::size_t k = 0; k < vocab; ++k) weights[r * vocab + k] = T(0);
  const Tensor<T> q(teacher_distributions.shape(), std::move(weights));
  LossTerm<T> term;
  term.token_count = count_valid(mask);
  term.sum = scale(sum(mul(q, log(student_distributions, T(kProbabilityFloor)))), T(-1));
  return term;
}

template <typename T>
LossTerm<T> representation_imitation_loss(const std::vector<Tensor<T>>& teacher_hiddens,
                                          const std::vector<Tensor<T>>& student_hiddens, double alpha,
                                          const TokenMatrix& mask) {
  if (teacher_hiddens.size() != student_hiddens.size()) {
    throw ContractError("representation_imitation_loss: teacher has " + std::to_string(teacher_hiddens.size()) +
                        " layers, student " + std::to_string(student_hiddens.size()));
  }
  if (alpha < 0) throw ContractError("alpha must be non-negative");
  LossTerm<T> term;
  term.token_count = count_valid(mask);
  Tensor<T> total = Tensor<T>::zeros({1});
  for (std::size_t l = 0; l < student_hiddens.size(); ++l) {
    const auto& s = student_hiddens[l];
    const auto& t = teacher_hiddens[l];
    if (s.shape() != t.shape()) {
      throw DimensionError("hidden states differ at layer " + std::to_string(l) + ": " + shape_to_string(t.shape()) +
                           " vs " + shape_to_string(s.shape()));
    }
    if (s.rank() != 3 || s.dim(0) != mask.batch || s.dim(1) != mask.length) {
      throw DimensionError("hidden states " + shape_to_string(s.shape()) + " do not align with the mask");
    }
    const auto phi = mean_square(sub(s, t.detach()));
    std::vector<T> gate(phi.numel(), T(0));
    for (std::size_t r = 0; r < gate.size(); ++r)
      if (mask.valid[r] && static_cast<double>(phi.at(r)) >= alpha) gate[r] = T(1);
    total = add(total, sum(mul(phi, Tensor<T>(phi.shape(), std::move(gate)))));
  }
  term.sum = total;
  return term;
}

LossBreakdown combined_loss(double nll, double il_prediction, double il_representation, double lambda1,
                            std::optional<double> lm_prediction, double lambda_lm) {
  LossBreakdown out;
  out.nll = nll;
  out.il_prediction = il_prediction;
  out.il_representation = il_representation;
  out.lm_prediction = lm_prediction;
  out.total = nll + lambda1 * (il_prediction + il_representation);
  if (lm_prediction) out.total += lambda_lm * *lm_prediction;
  return out;
}

template <typename T>
Tensor<T> combine_loss_tensors(const Tensor<T>& nll, const Tensor<T>& il_prediction,
                               const Tensor<T>& il_representation, T lambda1, const Tensor<T>* lm_prediction,
                               T lambda_lm) {
  auto total = add(nll, scale(add(il_prediction, il_representation), lambda1));
  if (lm_prediction != nullptr) total = add(total, scale(*lm_prediction, lambda_lm));
  return total;
}

#define SDKD_INSTANTIATE(T)                                                                                         \
  template Tensor<T> mask_tensor<T>(const TokenMatrix&);                                                            \
  template LossTerm<T> nll_loss(const Tensor<T>&, const TokenMatrix&);                                              \
  template LossTerm<T> prediction_imitation_loss(const Tensor<T>&, const Tensor<T>&, const TokenMatrix&);           \
  template LossTerm<T> representation_imitation_loss(const std::vector<Tensor<T>>&, const std::vector<Tensor<T>>&, \
                                                     double, const TokenMatrix&);                                   \
  template Tensor<T> combine_loss_tensors(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T, const Tensor<T>*, \
                                          T);

SDKD_INSTANTIATE(float)
SDKD_INSTANTIATE(double)

#undef SDKD_INSTANTIATE

}  // namespace sdkd
