// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdkd/losses.hpp"
#include "sdkd/model.hpp"
#include "sdkd/vocabulary.hpp"

namespace sdkd {

enum class HardTransferScope { kNone, kWordEmb, kEncoder };
std::string to_string(HardTransferScope scope);
HardTransferScope hard_transfer_from_string(const std::string& name);

struct TrainingConfig {
  double learning_rate = 1e-3;
  double grad_clip_norm = 2.0;
  std::size_t batch_size = 128;
  double alpha = 0.01;
  double lambda1 = 2.0;
  // Weight of the language-model imitation term.
  double lambda_lm = 0.5;
  // Softmax temperature for the imitation distributions; 1 leaves them raw.
  double temperature = 1.0;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  HardTransferScope hard_transfer_scope = HardTransferScope::kNone;
  // Stops after this many updates when non-zero, even mid-epoch.
  std::size_t max_steps = 0;
  std::size_t eval_interval = 100;

  static TrainingConfig desk_preset();
  void validate() const;
};

struct StepLog {
  std::size_t step = 0;  // 1-based update count
  std::size_t epoch = 0;
  LossBreakdown loss;
  double grad_norm = 0;
  std::optional<double> valid_loss;

  nlohmann::json to_json() const;
};

struct TrainingData {
  std::vector<EncodedExample> train;
  std::vector<EncodedExample> valid;
};

struct TrainedModel {
  ModelConfig config;
  ParameterSet<float> params;  // best-validation parameters
  std::vector<StepLog> log;
  std::optional<double> best_valid_loss;
  std::size_t best_step = 0;
  std::size_t steps = 0;
  std::set<std::string> frozen;

  Transformer<float> model() const { return Transformer<float>(config, params.clone()); }
};

using StepCallback = std::function<void(const StepLog&)>;

// Scenario teacher on (history, future). Throws DataError when the corpus
// is empty.
TrainedModel train_teacher(const TrainingData& data, const ModelConfig& config, const TrainingConfig& training,
                           const StepCallback& on_step = {});

// Decoder-only next-token model over responses.
TrainedModel train_lm_teacher(const TrainingData& data, const ModelConfig& config, const TrainingConfig& training,
                              const StepCallback& on_step = {});

// History-only student. With `teacher` the objective is the full
// distillation loss; without it the run is the plain likelihood baseline.
// Teacher parameters are read-only and verified unchanged afterwards.
// The student's training loss on one batch: per-token mean of the likelihood
// term plus lambda1-weighted imitation terms. Teachers run without gradients.
template <typename T>
struct Objective {
  Tensor<T> loss;
  LossBreakdown breakdown;
};

template <typename T>
Objective<T> distillation_objective(const Transformer<T>& student, const Transformer<T>* teacher,
                                    const Transformer<T>* lm_teacher, const Batch& batch,
                                    const TrainingConfig& training, const ForwardOptions& options = {});

TrainedModel train_student(const TrainingData& data, const Transformer<float>* teacher, const ModelConfig& config,
                           const TrainingConfig& training, const Transformer<float>* lm_teacher = nullptr,
                           const StepCallback& on_step = {});

// Copies teacher tensors into the student and returns their names, which
// the trainer keeps frozen. word-emb: both embedding tables; encoder: those
// plus every encoder tensor.
std::set<std::string> hard_transfer_init(ParameterSet<float>& student, const ModelConfig& student_config,
                                         const ParameterSet<float>& teacher, const ModelConfig& teacher_config,
                                         HardTransferScope scope);

// Per-token NLL of gold responses under teacher forcing, eval mode.
// Futures are fed exactly when the model is a scenario model.
double validation_loss(const Transformer<float>& model, const std::vector<EncodedExample>& examples,
                       std::size_t batch_size = 64);

// First logged step whose validation loss is <= target, if any.
std::optional<std::size_t> steps_to_reach(const std::vector<StepLog>& log, double target);

}  // namespace sdkd
