// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/optimizer.hpp"

#include <cmath>

#include "sdkd/errors.hpp"

namespace sdkd {

template <typename T>
double clip_global_norm(std::vector<std::span<T>> grads, double clip_norm) {
  double sq = 0;
  for (const auto& g : grads)
    for (T x : g) sq += static_cast<double>(x) * static_cast<double>(x);
  const double norm = std::sqrt(sq);
  if (clip_norm > 0 && norm > clip_norm) {
    const double factor = clip_norm / norm;
    for (auto& g : grads)
      for (T& x : g) x = static_cast<T>(static_cast<double>(x) * factor);
  }
  return norm;
}

template <typename T>
StepReport adam_step_with_clip(std::vector<std::span<T>> params, std::vector<std::span<const T>> grads,
                               AdamState& state, const AdamConfig& config) {
  if (params.size() != grads.size()) throw ContractError("adam: parameter and gradient lists differ in length");
  double sq = 0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i].empty() && grads[i].size() != params[i].size()) {
      throw DimensionError("adam: gradient " + std::to_string(i) + " has " + std::to_string(grads[i].size()) +
                           " values for " + std::to_string(params[i].size()) + " parameters");
    }
    for (T g : grads[i]) {
      if (!std::isfinite(static_cast<double>(g))) throw NumericError("adam: non-finite gradient, step aborted");
      sq += static_cast<double>(g) * static_cast<double>(g);
    }
  }
  StepReport report;
  report.grad_norm = std::sqrt(sq);
  if (config.clip_norm > 0 && report.grad_norm > config.clip_norm) report.clip_factor = config.clip_norm / report.grad_norm;

  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].size(), 0.0);
      state.v[i].assign(params[i].size(), 0.0);
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      const double g = grads[i].empty() ? 0.0 : static_cast<double>(grads[i][j]) * report.clip_factor;
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g;
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g * g;
      const double update = config.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + config.epsilon);
      params[i][j] = static_cast<T>(static_cast<double>(params[i][j]) - update);
    }
  }
  return report;
}

template <typename T>
StepReport adam_step_with_clip(ParameterSet<T>& params, const std::set<std::string>& frozen, AdamState& state,
                               const AdamConfig& config) {
  std::vector<std::span<T>> values;
  std::vector<std::span<const T>> grads;
  for (auto& [name, tensor] : params.entries()) {
    if (frozen.count(name)) continue;
    values.push_back(tensor.mutable_values());
    grads.push_back(tensor.grad());
  }
  return adam_step_with_clip<T>(std::move(values), std::move(grads), state, config);
}

#define SDKD_INSTANTIATE(T)                                                                                     \
  template double clip_global_norm<T>(std::vector<std::span<T>>, double);                                     \
  template StepReport adam_step_with_clip<T>(std::vector<std::span<T>>, std::vector<std::span<const T>>,        \
                                             AdamState&, const AdamConfig&);                                   \
  template StepReport adam_step_with_clip<T>(ParameterSet<T>&, const std::set<std::string>&, AdamState&,       \
                                             const AdamConfig&);

SDKD_INSTANTIATE(float)
SDKD_INSTANTIATE(double)

#undef SDKD_INSTANTIATE

}  // namespace sdkd
