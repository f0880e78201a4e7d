// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdkd/corpus.hpp"
#include "sdkd/model.hpp"

namespace sdkd {

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr std::size_t kReserved = 4;

  Vocabulary();  // reserved tokens only

  // Most frequent tokens (ties broken lexicographically) up to
  // max_size - 4, after the reserved ids.
  static Vocabulary build(const std::vector<TokenSeq>& sentences, std::size_t max_size);
  static Vocabulary build(const std::vector<DialogueExample>& examples, std::size_t max_size);
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  std::size_t size() const { return tokens_.size(); }
  int id_of(const std::string& token) const;
  const std::string& token_of(int id) const;
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> encode(const TokenSeq& tokens) const;
  // Stops at the first end-of-sequence id; drops pad/bos.
  TokenSeq decode(const std::vector<int>& ids) const;

  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);

 private:
  void append(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Ids ready for the model. Turns are joined with the end-of-sequence id as
// separator; the response carries no BOS/EOS (added at batching).
struct EncodedExample {
  std::vector<int> history;
  std::vector<int> response;
  std::vector<int> future;
};

std::vector<int> encode_turns(const Vocabulary& vocab, const std::vector<TokenSeq>& turns);

// History keeps its last `max_length` ids, future its first, response its
// first `max_length - 1` (room for BOS/EOS).
EncodedExample encode_example(const Vocabulary& vocab, const DialogueExample& example, std::size_t max_length);
std::vector<EncodedExample> encode_examples(const Vocabulary& vocab, const std::vector<DialogueExample>& examples,
                                            std::size_t max_length);

struct Batch {
  TokenMatrix history;
  std::optional<TokenMatrix> future;
  TokenMatrix response_input;   // [BOS, y1..yn]
  TokenMatrix response_target;  // [y1..yn, EOS]; valid mask = loss mask
  std::vector<std::size_t> history_lengths;
  std::vector<std::size_t> future_lengths;
  std::vector<std::size_t> response_lengths;  // n + 1 target positions
  std::vector<std::size_t> example_indices;

  std::size_t size() const { return history.batch; }
  std::size_t target_tokens() const;
};

// Padded batch of the given examples, in the given order.
Batch make_batch(const std::vector<EncodedExample>& examples, const std::vector<std::size_t>& indices,
                 bool include_future);

// Deterministic shuffle by seed, then consecutive batches of batch_size.
std::vector<Batch> batchify(const std::vector<EncodedExample>& examples, std::size_t batch_size, std::uint64_t seed,
                            bool include_future);

// Consecutive batches without shuffling (evaluation).
std::vector<Batch> sequential_batches(const std::vector<EncodedExample>& examples, std::size_t batch_size,
                                      bool include_future);

}  // namespace sdkd
