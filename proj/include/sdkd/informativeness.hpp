// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Splits examples into an Uninformative set (the {history -> response} or
// {response -> future} pair is many-to-one under a sameness measure) and
// the Other set.

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "sdkd/corpus.hpp"
#include "sdkd/embeddings.hpp"

namespace sdkd {

enum class SamenessStrategy { kExactMatch, kWordOverlap, kSentenceCluster };
SamenessStrategy sameness_from_string(const std::string& name);
std::string to_string(SamenessStrategy strategy);

// |set(a) ∩ set(b)| / max(|set(a)|, |set(b)|); two empty sequences give 1.
double word_overlap_ratio(const TokenSeq& a, const TokenSeq& b);
// Strictly more than 80% overlap.
bool word_overlap_equivalent(const TokenSeq& a, const TokenSeq& b, double threshold = 0.8);

// Weighted bag-of-words sentence vectors, weight(w) = a / (a + p(w)) with
// p the relative frequency of w in the reference (training) text.
class SentenceEncoder {
 public:
  SentenceEncoder(const EmbeddingTable& embeddings, const std::vector<TokenSeq>& reference_text, double a = 1e-3);

  std::vector<double> encode(const TokenSeq& sentence) const;
  double weight(const std::string& token) const;

 private:
  const EmbeddingTable* embeddings_;
  std::unordered_map<std::string, double> frequency_;
  double a_;
};

// Visits vectors in order; each joins the first cluster whose centroid
// (mean of members) has cosine >= threshold, else founds a new one.
std::vector<std::size_t> single_pass_cluster(const std::vector<std::vector<double>>& vectors, double threshold);
std::vector<std::size_t> single_pass_cluster(const std::vector<TokenSeq>& sentences, const SentenceEncoder& encoder,
                                             double threshold);

struct ClusterSettings {
  const EmbeddingTable* embeddings = nullptr;
  double one_turn_threshold = 0.8;
  double multi_turn_threshold = 0.98;
  double weight_a = 1e-3;
};

struct InformativenessSplit {
  std::vector<std::size_t> uninformative;  // example indices, ascending
  std::vector<std::size_t> other;
};

InformativenessSplit classify_uninformative(const std::vector<DialogueExample>& examples, SamenessStrategy strategy,
                                            const ClusterSettings& clusters = {});

}  // namespace sdkd
