// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sdkd/model.hpp"
#include "sdkd/vocabulary.hpp"

namespace sdkd {

enum class DecodeStrategy { kGreedy, kBeam };
std::string to_string(DecodeStrategy strategy);
DecodeStrategy decode_strategy_from_string(const std::string& name);

struct DecodeConfig {
  DecodeStrategy strategy = DecodeStrategy::kGreedy;
  std::size_t beam_width = 4;
  std::size_t max_length = 25;  // tokens, end-of-sequence included
  double length_penalty = 0;    // score / length^penalty

  void validate() const;
};

struct Hypothesis {
  std::vector<int> tokens;  // ends with eos when finished
  double log_prob = 0;
  bool finished = false;
  bool truncated = false;  // stopped by max_length without eos

  double score(double length_penalty) const;
};

// Next-token log-probabilities given the tokens generated so far.
using StepScorer = std::function<std::vector<double>(const std::vector<int>& prefix)>;

// Argmax per step; ties go to the lowest id.
Hypothesis greedy_search(const StepScorer& scorer, const DecodeConfig& config, int eos_id = Vocabulary::kEos);

// Beam search over log-probabilities. The greedy path is scored alongside
// the beam and returned when nothing in the beam beats it, which makes the
// result monotone in the width.
Hypothesis beam_search(const StepScorer& scorer, const DecodeConfig& config, int eos_id = Vocabulary::kEos);

// Scorer over a conventional model for one history; pad and bos are never
// proposed.
StepScorer model_scorer(const Transformer<float>& model, const std::vector<int>& history_ids);

Hypothesis greedy_decode(const Transformer<float>& model, const std::vector<int>& history_ids,
                         const DecodeConfig& config);
Hypothesis beam_decode(const Transformer<float>& model, const std::vector<int>& history_ids,
                       const DecodeConfig& config);
// Dispatches on config.strategy.
Hypothesis generate(const Transformer<float>& model, const std::vector<int>& history_ids, const DecodeConfig& config);

}  // namespace sdkd
