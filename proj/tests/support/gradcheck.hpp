// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite differences over double tensors.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sdkd/tensor.hpp"

namespace sdkd::testing {

// Largest |a - n| / max(|a|, |n|, floor) across every entry of every
// input, where a is the analytic gradient of `loss_fn` and n the central
// difference with step h.
inline double max_relative_error(std::vector<TensorD>& inputs, const std::function<TensorD()>& loss_fn,
                                 double h = 1e-5, double floor = 1e-7) {
  for (auto& x : inputs) x.zero_grad();
  backward(loss_fn());
  std::vector<std::vector<double>> analytic;
  for (auto& x : inputs) {
    if (x.has_grad()) {
      analytic.emplace_back(x.grad().begin(), x.grad().end());
    } else {
      analytic.emplace_back(x.numel(), 0.0);
    }
  }
  double worst = 0;
  NoGradGuard guard;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto values = inputs[i].mutable_values();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double saved = values[j];
      values[j] = saved + h;
      const double up = loss_fn().item();
      values[j] = saved - h;
      const double down = loss_fn().item();
      values[j] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[i][j];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace sdkd::testing
