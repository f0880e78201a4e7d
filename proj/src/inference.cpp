// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdkd/errors.hpp"

namespace sdkd {

std::string to_string(DecodeStrategy strategy) {
  return strategy == DecodeStrategy::kBeam ? "beam" : "greedy";
}

DecodeStrategy decode_strategy_from_string(const std::string& name) {
  if (name == "greedy") return DecodeStrategy::kGreedy;
  if (name == "beam") return DecodeStrategy::kBeam;
  throw UsageError("unknown decoding strategy '" + name + "' (greedy | beam)");
}

void DecodeConfig::validate() const {
  if (beam_width < 1) throw ContractError("beam_width must be at least 1");
  if (max_length < 1) throw ContractError("max_length must be at least 1");
  if (length_penalty < 0) throw ContractError("length_penalty must be non-negative");
}

double Hypothesis::score(double length_penalty) const {
  if (length_penalty == 0 || tokens.empty()) return log_prob;
  return log_prob / std::pow(static_cast<double>(tokens.size()), length_penalty);
}

Hypothesis greedy_search(const StepScorer& scorer, const DecodeConfig& config, int eos_id) {
  config.validate();
  Hypothesis h;
  while (h.tokens.size() < config.max_length) {
    const auto lp = scorer(h.tokens);
    std::size_t best = lp.size();
    for (std::size_t k = 0; k < lp.size(); ++k)
      if (std::isfinite(lp[k]) && (best == lp.size() || lp[k] > lp[best])) best = k;
    if (best == lp.size()) throw NumericError("decoder produced no finite log-probability");
    h.tokens.push_back(static_cast<int>(best));
    h.log_prob += lp[best];
    if (static_cast<int>(best) == eos_id) {
      h.finished = true;
      break;
    }
  }
  h.truncated = !h.finished;
  return h;
}

Hypothesis beam_search(const StepScorer& scorer, const DecodeConfig& config, int eos_id) {
  config.validate();
  struct Candidate {
    std::size_t parent;
    int token;
    double log_prob;
  };
  std::vector<Hypothesis> live(1), finished;
  for (std::size_t t = 0; t < config.max_length && !live.empty(); ++t) {
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const auto lp = scorer(live[i].tokens);
      for (std::size_t k = 0; k < lp.size(); ++k)
        if (std::isfinite(lp[k])) candidates.push_back({i, static_cast<int>(k), live[i].log_prob + lp[k]});
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
      return a.log_prob > b.log_prob;
    });
    if (candidates.size() > config.beam_width) candidates.resize(config.beam_width);
    std::vector<Hypothesis> next;
    for (const auto& c : candidates) {
      Hypothesis h = live[c.parent];
      h.tokens.push_back(c.token);
      h.log_prob = c.log_prob;
      if (c.token == eos_id) {
        h.finished = true;
        finished.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
    if (config.length_penalty == 0 && !finished.empty() && !live.empty()) {
      // Raw log-probabilities only fall, so no live hypothesis can overtake.
      double best_finished = -std::numeric_limits<double>::infinity();
      for (const auto& f : finished) best_finished = std::max(best_finished, f.log_prob);
      if (best_finished >= live.front().log_prob) break;
    }
  }
  std::vector<Hypothesis> pool = finished;
  if (pool.empty())
    for (auto& h : live) {
      h.truncated = true;
      pool.push_back(h);
    }
  Hypothesis best = greedy_search(scorer, config, eos_id);
  for (const auto& h : pool)
    if (h.score(config.length_penalty) > best.score(config.length_penalty)) best = h;
  return best;
}

StepScorer model_scorer(const Transformer<float>& model, const std::vector<int>& history_ids) {
  if (model.config().variant != Variant::kConventional) {
    throw ContractError("generation needs a conventional (history-only) model");
  }
  std::vector<int> history = history_ids.empty() ? std::vector<int>{Vocabulary::kUnk} : history_ids;
  Memory<float> memory;
  {
    NoGradGuard guard;
    memory = model.encode(TokenMatrix::from_rows({history}, Vocabulary::kPad));
  }
  return [&model, memory](const std::vector<int>& prefix) {
    NoGradGuard guard;
    std::vector<int> input{Vocabulary::kBos};
    input.insert(input.end(), prefix.begin(), prefix.end());
    const auto out = model.decode(TokenMatrix::from_rows({input}, Vocabulary::kPad), &memory, nullptr);
    const std::size_t vocab = out.logits.dim(2);
    const auto logits = out.logits.values().subspan((input.size() - 1) * vocab, vocab);
    std::vector<double> lp(logits.begin(), logits.end());
    lp[Vocabulary::kPad] = lp[Vocabulary::kBos] = -std::numeric_limits<double>::infinity();
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : lp) peak = std::max(peak, v);
    double z = 0;
    for (double v : lp) z += std::isfinite(v) ? std::exp(v - peak) : 0.0;
    const double log_z = peak + std::log(z);
    for (double& v : lp) v -= log_z;
    return lp;
  };
}

Hypothesis greedy_decode(const Transformer<float>& model, const std::vector<int>& history_ids,
                         const DecodeConfig& config) {
  return greedy_search(model_scorer(model, history_ids), config);
}

Hypothesis beam_decode(const Transformer<float>& model, const std::vector<int>& history_ids,
                       const DecodeConfig& config) {
  return beam_search(model_scorer(model, history_ids), config);
}

Hypothesis generate(const Transformer<float>& model, const std::vector<int>& history_ids, const DecodeConfig& config) {
  return config.strategy == DecodeStrategy::kBeam ? beam_decode(model, history_ids, config)
                                                  : greedy_decode(model, history_ids, config);
}

}  // namespace sdkd
