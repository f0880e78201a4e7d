// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sdkd/model.hpp"
#include "sdkd/trainer.hpp"
#include "sdkd/vocabulary.hpp"
#include "synthetic_corpus.hpp"

namespace sdkd::testing {

struct EncodedCorpus {
  Vocabulary vocab;
  std::vector<DialogueExample> raw;
  TrainingData data;
};

// Synthetic corpus split into train and valid, encoded with a shared vocabulary.
inline EncodedCorpus encoded_synthetic(SyntheticSpec spec, std::size_t valid) {
  EncodedCorpus out;
  spec.examples += valid;
  out.raw = synthetic_dialogues(spec);
  out.vocab = Vocabulary::build(out.raw, 1000);
  const auto encoded = encode_examples(out.vocab, out.raw, 64);
  const auto split = encoded.begin() + static_cast<std::ptrdiff_t>(encoded.size() - valid);
  out.data.train.assign(encoded.begin(), split);
  out.data.valid.assign(split, encoded.end());
  return out;
}

inline ModelConfig tiny_model(std::size_t vocab, Variant variant) {
  ModelConfig c = ModelConfig::desk_preset(vocab, variant);
  c.model_dim = 16;
  c.ffn_dim = 32;
  c.num_blocks = 1;
  c.dropout_rate = 0;
  return c;
}

inline TrainingConfig short_run(std::size_t steps) {
  TrainingConfig t = TrainingConfig::desk_preset();
  t.epochs = 0;
  t.max_steps = steps;
  t.eval_interval = steps;
  return t;
}

}  // namespace sdkd::testing
