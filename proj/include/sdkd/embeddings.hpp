// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdkd/corpus.hpp"

namespace sdkd {

class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  void set(const std::string& token, std::vector<double> vector);
  // nullptr for unknown tokens.
  const std::vector<double>* find(const std::string& token) const;

  // Text format: "<count> <dim>" then "token v1 ... vd" per line.
  void write(std::ostream& out) const;
  static EmbeddingTable read(std::istream& in);

 private:
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::vector<std::vector<double>> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct SkipGramOptions {
  std::size_t dim = 64;
  std::size_t window = 2;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;
};

// Skip-gram with negative sampling (unigram^0.75 noise), linear learning
// rate decay, single-threaded and deterministic in the seed. Throws
// DataError for corpora under 100 tokens.
EmbeddingTable train_word_embeddings(const std::vector<TokenSeq>& sentences, const SkipGramOptions& options);

double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace sdkd
