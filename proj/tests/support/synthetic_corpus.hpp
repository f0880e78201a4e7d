// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dialogues whose response ends in an answer token fixed by a marker that
// only the future conversation contains. The history is noise, middle
// response tokens are drawn at random, so a history-only model can at best
// guess the answer.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sdkd/corpus.hpp"

namespace sdkd::testing {

struct SyntheticSpec {
  std::size_t examples = 256;
  std::size_t noise_words = 24;
  std::size_t markers = 4;         // also the number of answers
  std::size_t filler_words = 6;    // random middle tokens
  std::size_t history_length = 6;  // tokens per history turn
  std::size_t future_length = 6;
  std::size_t random_middle = 2;   // aleatoric response positions
  std::uint64_t seed = 1;
};

inline std::string marker_token(std::size_t k) { return "m" + std::to_string(k); }
inline std::string answer_token(std::size_t k) { return "a" + std::to_string(k); }

inline std::vector<DialogueExample> synthetic_dialogues(const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  auto pick = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::vector<DialogueExample> out;
  out.reserve(spec.examples);
  for (std::size_t e = 0; e < spec.examples; ++e) {
    DialogueExample ex;
    TokenSeq history;
    for (std::size_t i = 0; i < spec.history_length; ++i) history.push_back("w" + std::to_string(pick(spec.noise_words)));
    ex.history.push_back(std::move(history));

    const std::size_t k = pick(spec.markers);
    TokenSeq future;
    for (std::size_t i = 0; i < spec.future_length; ++i) future.push_back("w" + std::to_string(pick(spec.noise_words)));
    future[pick(spec.future_length)] = marker_token(k);
    ex.future.push_back(std::move(future));

    ex.response.push_back("so");
    for (std::size_t i = 0; i < spec.random_middle; ++i) ex.response.push_back("f" + std::to_string(pick(spec.filler_words)));
    ex.response.push_back(answer_token(k));
    out.push_back(std::move(ex));
  }
  return out;
}

// Index of the answer token in every synthetic response.
inline std::size_t answer_position(const SyntheticSpec& spec) { return 1 + spec.random_middle; }

}  // namespace sdkd::testing
