// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sdkd/model.hpp"

namespace sdkd {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 2.0;  // <= 0 disables clipping
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

struct StepReport {
  double grad_norm = 0;    // before clipping
  double clip_factor = 1;  // multiplier applied to every gradient
};

// Scales `grads` in place so their global L2 norm is at most clip_norm.
// Returns the norm before scaling.
template <typename T>
double clip_global_norm(std::vector<std::span<T>> grads, double clip_norm);

// One clipped Adam update with bias correction. Empty gradient spans count
// as zero. A non-finite gradient raises NumericError before anything is
// modified.
template <typename T>
StepReport adam_step_with_clip(std::vector<std::span<T>> params, std::vector<std::span<const T>> grads,
                               AdamState& state, const AdamConfig& config);

// Updates every tensor of `params` not named in `frozen`, using the
// gradients accumulated on the tensors.
template <typename T>
StepReport adam_step_with_clip(ParameterSet<T>& params, const std::set<std::string>& frozen, AdamState& state,
                               const AdamConfig& config);

}  // namespace sdkd
