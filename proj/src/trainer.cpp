// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/trainer.hpp"

#include <cmath>

#include "sdkd/errors.hpp"
#include "sdkd/optimizer.hpp"

namespace sdkd {

std::string to_string(HardTransferScope scope) {
  switch (scope) {
    case HardTransferScope::kNone:
      return "none";
    case HardTransferScope::kWordEmb:
      return "word-emb";
    case HardTransferScope::kEncoder:
      return "encoder";
  }
  return "none";
}

HardTransferScope hard_transfer_from_string(const std::string& name) {
  if (name == "none") return HardTransferScope::kNone;
  if (name == "word-emb") return HardTransferScope::kWordEmb;
  if (name == "encoder") return HardTransferScope::kEncoder;
  throw UsageError("unknown hard-transfer scope '" + name + "' (none | word-emb | encoder)");
}

TrainingConfig TrainingConfig::desk_preset() {
  TrainingConfig c;
  c.batch_size = 16;
  return c;
}

void TrainingConfig::validate() const {
  if (!(learning_rate > 0)) throw ContractError("learning_rate must be positive");
  if (batch_size == 0) throw ContractError("batch_size must be positive");
  if (alpha < 0) throw ContractError("alpha must be non-negative");
  if (lambda1 < 0) throw ContractError("lambda1 must be non-negative");
  if (lambda_lm < 0) throw ContractError("lambda_lm must be non-negative");
  if (!(temperature > 0)) throw ContractError("temperature must be positive");
  if (eval_interval == 0) throw ContractError("eval_interval must be positive");
  if (epochs == 0 && max_steps == 0) throw ContractError("either epochs or max_steps must be positive");
}

nlohmann::json StepLog::to_json() const {
  nlohmann::json j;
  j["step"] = step;
  j["epoch"] = epoch;
  j["nll"] = loss.nll;
  j["nll_sum"] = loss.nll_sum;
  j["il_prediction"] = loss.il_prediction;
  j["il_representation"] = loss.il_representation;
  if (loss.lm_prediction) j["lm_prediction"] = *loss.lm_prediction;
  j["total"] = loss.total;
  j["token_count"] = loss.token_count;
  j["grad_norm"] = grad_norm;
  if (valid_loss) j["valid_loss"] = *valid_loss;
  return j;
}

namespace {

void check_vocabulary(const TrainingData& data, const ModelConfig& config) {
  auto check = [&](const std::vector<int>& ids) {
    for (int id : ids)
      if (id < 0 || static_cast<std::size_t>(id) >= config.vocab_size) {
        throw ContractError("token id " + std::to_string(id) + " outside model vocabulary of size " +
                            std::to_string(config.vocab_size));
      }
  };
  for (const auto* set : {&data.train, &data.valid})
    for (const auto& ex : *set) {
      check(ex.history);
      check(ex.response);
      check(ex.future);
    }
}

template <typename T>
Tensor<T> imitation_view(const DecodeOutput<T>& out, double temperature) {
  if (temperature == 1.0) return out.distributions;
  return softmax(scale(out.logits, static_cast<T>(1.0 / temperature)), 2);
}

struct StepResult {
  Tensor<float> loss;
  LossBreakdown breakdown;
};

using StepFn = std::function<StepResult(const Transformer<float>&, const Batch&, const ForwardOptions&)>;

StepResult plain_likelihood(const DecodeOutput<float>& out, const Batch& batch) {
  const auto nll = nll_loss(out.distributions, batch.response_target);
  const float inv = 1.0f / static_cast<float>(std::max<std::size_t>(1, nll.token_count));
  StepResult r;
  r.loss = scale(nll.sum, inv);
  r.breakdown = combined_loss(nll.mean_value(), 0, 0, 0);
  r.breakdown.nll_sum = nll.sum_value();
  r.breakdown.total = static_cast<double>(r.loss.item());
  r.breakdown.token_count = nll.token_count;
  return r;
}

TrainedModel run_loop(const TrainingData& data, const ModelConfig& config, const TrainingConfig& training,
                      ParameterSet<float> params, std::set<std::string> frozen, bool include_future,
                      const StepFn& step_fn, const StepCallback& on_step) {
  if (data.train.empty()) throw DataError("training corpus is empty");
  training.validate();
  config.validate();
  check_vocabulary(data, config);
  for (auto& [name, tensor] : params.entries()) tensor.set_requires_grad(!frozen.count(name));

  Transformer<float> model(config, std::move(params));
  const auto encoded = data.train;
  AdamConfig adam;
  adam.learning_rate = training.learning_rate;
  adam.clip_norm = training.grad_clip_norm;
  AdamState state;
  std::mt19937_64 dropout_rng(training.seed ^ 0x9E3779B97F4A7C15ull);
  ForwardOptions options{true, &dropout_rng};

  TrainedModel result;
  result.config = config;
  result.frozen = frozen;
  result.params = model.params().clone();
  auto evaluate = [&](StepLog& log) {
    if (data.valid.empty()) return;
    log.valid_loss = validation_loss(model, data.valid);
    if (!result.best_valid_loss || *log.valid_loss < *result.best_valid_loss) {
      result.best_valid_loss = log.valid_loss;
      result.best_step = log.step;
      result.params = model.params().clone();
    }
  };

  const std::size_t epochs = training.epochs == 0 ? SIZE_MAX : training.epochs;
  std::size_t step = 0;
  bool done = false;
  for (std::size_t epoch = 0; epoch < epochs && !done; ++epoch) {
    const auto batches = batchify(encoded, training.batch_size, training.seed * 1000003ull + epoch, include_future);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      model.params().zero_grad();
      auto r = step_fn(model, batches[b], options);
      backward(r.loss);
      const auto report = adam_step_with_clip(model.params(), frozen, state, adam);
      ++step;
      StepLog log;
      log.step = step;
      log.epoch = epoch;
      log.loss = r.breakdown;
      log.grad_norm = report.grad_norm;
      done = training.max_steps != 0 && step >= training.max_steps;
      const bool last = done || (epoch + 1 == epochs && b + 1 == batches.size());
      if (step % training.eval_interval == 0 || last) evaluate(log);
      result.log.push_back(log);
      if (on_step) on_step(log);
      if (done) break;
    }
  }
  result.steps = step;
  model.params().zero_grad();
  if (data.valid.empty()) result.params = model.params().clone();
  for (auto& [name, tensor] : result.params.entries()) tensor.set_requires_grad(false);
  return result;
}

}  // namespace

double validation_loss(const Transformer<float>& model, const std::vector<EncodedExample>& examples,
                       std::size_t batch_size) {
  if (examples.empty()) throw DataError("validation set is empty");
  NoGradGuard guard;
  const Variant variant = model.config().variant;
  const bool with_future = variant == Variant::kScenario;
  double total = 0;
  std::size_t tokens = 0;
  for (const auto& batch : sequential_batches(examples, batch_size, with_future)) {
    DecodeOutput<float> out;
    if (variant == Variant::kLanguageModel) {
      out = model.decode(batch.response_input, nullptr, nullptr);
    } else {
      const auto hist = model.encode(batch.history);
      if (with_future) {
        const auto fut = model.encode(*batch.future);
        out = model.decode(batch.response_input, &hist, &fut);
      } else {
        out = model.decode(batch.response_input, &hist, nullptr);
      }
    }
    const auto nll = nll_loss(out.distributions, batch.response_target);
    total += nll.sum_value();
    tokens += nll.token_count;
  }
  return tokens ? total / static_cast<double>(tokens) : 0.0;
}

std::optional<std::size_t> steps_to_reach(const std::vector<StepLog>& log, double target) {
  for (const auto& entry : log)
    if (entry.valid_loss && *entry.valid_loss <= target) return entry.step;
  return std::nullopt;
}

TrainedModel train_teacher(const TrainingData& data, const ModelConfig& config, const TrainingConfig& training,
                           const StepCallback& on_step) {
  if (config.variant != Variant::kScenario) throw ContractError("train_teacher needs the scenario variant");
  StepFn fn = [](const Transformer<float>& model, const Batch& batch, const ForwardOptions& options) {
    const auto hist = model.encode(batch.history, options);
    const auto fut = model.encode(*batch.future, options);
    return plain_likelihood(model.decode(batch.response_input, &hist, &fut, options), batch);
  };
  return run_loop(data, config, training, init_params<float>(config, training.seed), {}, true, fn, on_step);
}

TrainedModel train_lm_teacher(const TrainingData& data, const ModelConfig& config, const TrainingConfig& training,
                              const StepCallback& on_step) {
  if (config.variant != Variant::kLanguageModel) throw ContractError("train_lm_teacher needs the language_model variant");
  StepFn fn = [](const Transformer<float>& model, const Batch& batch, const ForwardOptions& options) {
    return plain_likelihood(model.decode(batch.response_input, nullptr, nullptr, options), batch);
  };
  return run_loop(data, config, training, init_params<float>(config, training.seed), {}, false, fn, on_step);
}

std::set<std::string> hard_transfer_init(ParameterSet<float>& student, const ModelConfig& student_config,
                                         const ParameterSet<float>& teacher, const ModelConfig& teacher_config,
                                         HardTransferScope scope) {
  if (!student_config.architecture_matches(teacher_config)) {
    throw ContractError("hard transfer: student and teacher configurations differ");
  }
  std::set<std::string> frozen;
  if (scope == HardTransferScope::kNone) return frozen;
  for (auto& [name, tensor] : student.entries()) {
    const bool embedding = name == "encoder.embedding" || name == "decoder.embedding";
    const bool encoder = name.rfind("encoder.", 0) == 0;
    if (!(embedding || (scope == HardTransferScope::kEncoder && encoder))) continue;
    if (!teacher.contains(name)) throw ContractError("hard transfer: teacher lacks tensor '" + name + "'");
    const auto& source = teacher.at(name);
    if (source.shape() != tensor.shape()) throw ContractError("hard transfer: shape mismatch for '" + name + "'");
    tensor = source.detach();
    frozen.insert(name);
  }
  return frozen;
}

template <typename T>
Objective<T> distillation_objective(const Transformer<T>& student, const Transformer<T>* teacher,
                                    const Transformer<T>* lm_teacher, const Batch& batch,
                                    const TrainingConfig& training, const ForwardOptions& options) {
  const auto hist = student.encode(batch.history, options);
  const auto out = student.decode(batch.response_input, &hist, nullptr, options);
  const auto& target = batch.response_target;
  const auto nll = nll_loss(out.distributions, target);
  LossTerm<T> ilp, ilr;
  ilp.sum = ilr.sum = Tensor<T>::zeros({1});
  std::optional<LossTerm<T>> lmp;
  if (teacher || lm_teacher) {
    const auto student_view = imitation_view(out, training.temperature);
    if (teacher) {
      if (!batch.future) throw ContractError("distillation batch lacks future turns");
      DecodeOutput<T> tout;
      {
        NoGradGuard guard;
        const auto th = teacher->encode(batch.history);
        const auto tf = teacher->encode(*batch.future);
        tout = teacher->decode(batch.response_input, &th, &tf);
      }
      ilp = prediction_imitation_loss(imitation_view(tout, training.temperature), student_view, target);
      ilr = representation_imitation_loss(tout.hiddens, out.hiddens, training.alpha, target);
    }
    if (lm_teacher) {
      DecodeOutput<T> lout;
      {
        NoGradGuard guard;
        lout = lm_teacher->decode(batch.response_input, nullptr, nullptr);
      }
      lmp = prediction_imitation_loss(imitation_view(lout, training.temperature), student_view, target);
    }
  }
  const auto total = combine_loss_tensors(nll.sum, ilp.sum, ilr.sum, static_cast<T>(training.lambda1),
                                          lmp ? &lmp->sum : nullptr, static_cast<T>(training.lambda_lm));
  const double count = static_cast<double>(std::max<std::size_t>(1, nll.token_count));
  Objective<T> r;
  r.loss = scale(total, static_cast<T>(1.0 / count));
  r.breakdown = combined_loss(nll.mean_value(), ilp.sum_value() / count, ilr.sum_value() / count, training.lambda1,
                              lmp ? std::optional<double>(lmp->sum_value() / count) : std::nullopt,
                              training.lambda_lm);
  r.breakdown.nll_sum = nll.sum_value();
  r.breakdown.total = static_cast<double>(r.loss.item());
  r.breakdown.token_count = nll.token_count;
  return r;
}

template Objective<float> distillation_objective(const Transformer<float>&, const Transformer<float>*,
                                                 const Transformer<float>*, const Batch&, const TrainingConfig&,
                                                 const ForwardOptions&);
template Objective<double> distillation_objective(const Transformer<double>&, const Transformer<double>*,
                                                  const Transformer<double>*, const Batch&, const TrainingConfig&,
                                                  const ForwardOptions&);

TrainedModel train_student(const TrainingData& data, const Transformer<float>* teacher, const ModelConfig& config,
                           const TrainingConfig& training, const Transformer<float>* lm_teacher,
                           const StepCallback& on_step) {
  if (config.variant != Variant::kConventional) throw ContractError("train_student needs the conventional variant");
  if (teacher && !config.architecture_matches(teacher->config())) {
    throw ContractError("teacher configuration does not match the student");
  }
  if (teacher && teacher->config().variant != Variant::kScenario) throw ContractError("teacher must be a scenario model");
  if (lm_teacher) {
    if (lm_teacher->config().variant != Variant::kLanguageModel) throw ContractError("lm teacher must be a language model");
    if (lm_teacher->config().vocab_size != config.vocab_size) throw ContractError("lm teacher vocabulary differs");
  }
  if (!teacher && training.hard_transfer_scope != HardTransferScope::kNone) {
    throw ContractError("hard transfer needs a teacher");
  }
  const std::uint64_t teacher_hash = teacher ? parameter_fingerprint(teacher->params()) : 0;
  const std::uint64_t lm_hash = lm_teacher ? parameter_fingerprint(lm_teacher->params()) : 0;

  auto params = init_params<float>(config, training.seed);
  std::set<std::string> frozen;
  if (teacher) frozen = hard_transfer_init(params, config, teacher->params(), teacher->config(), training.hard_transfer_scope);

  StepFn fn = [&](const Transformer<float>& model, const Batch& batch, const ForwardOptions& options) {
    auto objective = distillation_objective(model, teacher, lm_teacher, batch, training, options);
    return StepResult{std::move(objective.loss), objective.breakdown};
  };
  auto result = run_loop(data, config, training, std::move(params), std::move(frozen), teacher != nullptr, fn, on_step);
  if (teacher && parameter_fingerprint(teacher->params()) != teacher_hash) {
    throw ContractError("teacher parameters changed during student training");
  }
  if (lm_teacher && parameter_fingerprint(lm_teacher->params()) != lm_hash) {
    throw ContractError("lm teacher parameters changed during student training");
  }
  return result;
}

}  // namespace sdkd
