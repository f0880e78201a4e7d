// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/informativeness.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "sdkd/errors.hpp"

namespace sdkd {

SamenessStrategy sameness_from_string(const std::string& name) {
  if (name == "exact-match") return SamenessStrategy::kExactMatch;
  if (name == "word-overlap") return SamenessStrategy::kWordOverlap;
  if (name == "sentence-cluster") return SamenessStrategy::kSentenceCluster;
  throw UsageError("unknown strategy '" + name + "' (exact-match | word-overlap | sentence-cluster)");
}

std::string to_string(SamenessStrategy strategy) {
  switch (strategy) {
    case SamenessStrategy::kExactMatch:
      return "exact-match";
    case SamenessStrategy::kWordOverlap:
      return "word-overlap";
    case SamenessStrategy::kSentenceCluster:
      return "sentence-cluster";
  }
  return "exact-match";
}

double word_overlap_ratio(const TokenSeq& a, const TokenSeq& b) {
  const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t shared = 0;
  for (const auto& t : sa) shared += sb.count(t);
  return static_cast<double>(shared) / static_cast<double>(std::max(sa.size(), sb.size()));
}

bool word_overlap_equivalent(const TokenSeq& a, const TokenSeq& b, double threshold) {
  return word_overlap_ratio(a, b) > threshold;
}

SentenceEncoder::SentenceEncoder(const EmbeddingTable& embeddings, const std::vector<TokenSeq>& reference_text, double a)
    : embeddings_(&embeddings), a_(a) {
  std::size_t total = 0;
  for (const auto& s : reference_text)
    for (const auto& t : s) {
      frequency_[t] += 1.0;
      ++total;
    }
  if (total > 0)
    for (auto& [_, f] : frequency_) f /= static_cast<double>(total);
}

double SentenceEncoder::weight(const std::string& token) const {
  auto it = frequency_.find(token);
  const double p = it == frequency_.end() ? 0.0 : it->second;
  return a_ / (a_ + p);
}

std::vector<double> SentenceEncoder::encode(const TokenSeq& sentence) const {
  std::vector<double> v(embeddings_->dim(), 0.0);
  for (const auto& t : sentence) {
    const auto* e = embeddings_->find(t);
    if (e == nullptr) continue;
    const double w = weight(t);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += w * (*e)[j];
  }
  return v;
}

std::vector<std::size_t> single_pass_cluster(const std::vector<std::vector<double>>& vectors, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ContractError("cluster threshold must be in (0, 1]");
  std::vector<std::vector<double>> sums;
  std::vector<std::size_t> members;
  std::vector<std::size_t> assignment;
  assignment.reserve(vectors.size());
  for (const auto& v : vectors) {
    std::size_t chosen = sums.size();
    for (std::size_t c = 0; c < sums.size(); ++c) {
      // cosine is scale invariant, so the running sum stands in for the mean
      if (cosine(v, sums[c]) >= threshold) {
        chosen = c;
        break;
      }
    }
    if (chosen == sums.size()) {
      sums.push_back(v);
      members.push_back(1);
    } else {
      for (std::size_t j = 0; j < v.size(); ++j) sums[chosen][j] += v[j];
      ++members[chosen];
    }
    assignment.push_back(chosen);
  }
  return assignment;
}

std::vector<std::size_t> single_pass_cluster(const std::vector<TokenSeq>& sentences, const SentenceEncoder& encoder,
                                             double threshold) {
  std::vector<std::vector<double>> vectors;
  vectors.reserve(sentences.size());
  for (const auto& s : sentences) vectors.push_back(encoder.encode(s));
  return single_pass_cluster(vectors, threshold);
}

namespace {

TokenSeq flatten(const std::vector<TokenSeq>& turns) {
  TokenSeq out;
  for (const auto& t : turns) out.insert(out.end(), t.begin(), t.end());
  return out;
}

std::vector<std::size_t> exact_classes(const std::vector<TokenSeq>& seqs) {
  std::map<TokenSeq, std::size_t> ids;
  std::vector<std::size_t> out;
  for (const auto& s : seqs) out.push_back(ids.emplace(s, ids.size()).first->second);
  return out;
}

// Marks i when some j shares i's second class but not its first class.
void mark_by_classes(const std::vector<std::size_t>& first, const std::vector<std::size_t>& second,
                     std::vector<bool>& marked) {
  std::map<std::size_t, std::set<std::size_t>> firsts_per_second;
  for (std::size_t i = 0; i < first.size(); ++i) firsts_per_second[second[i]].insert(first[i]);
  for (std::size_t i = 0; i < first.size(); ++i)
    if (firsts_per_second[second[i]].size() > 1) marked[i] = true;
}

void mark_by_overlap(const std::vector<TokenSeq>& first, const std::vector<TokenSeq>& second,
                     std::vector<bool>& marked) {
  const std::size_t n = first.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (word_overlap_equivalent(second[i], second[j]) && !word_overlap_equivalent(first[i], first[j])) {
        marked[i] = true;
        marked[j] = true;
      }
    }
}

}  // namespace

InformativenessSplit classify_uninformative(const std::vector<DialogueExample>& examples, SamenessStrategy strategy,
                                            const ClusterSettings& clusters) {
  std::vector<TokenSeq> histories, responses, futures;
  std::size_t history_turns = 1, future_turns = 1;
  for (const auto& ex : examples) {
    histories.push_back(flatten(ex.history));
    responses.push_back(ex.response);
    futures.push_back(flatten(ex.future));
    history_turns = std::max(history_turns, ex.history.size());
    future_turns = std::max(future_turns, ex.future.size());
  }
  std::vector<bool> marked(examples.size(), false);
  switch (strategy) {
    case SamenessStrategy::kExactMatch: {
      const auto h = exact_classes(histories), r = exact_classes(responses), f = exact_classes(futures);
      mark_by_classes(h, r, marked);
      mark_by_classes(r, f, marked);
      break;
    }
    case SamenessStrategy::kWordOverlap:
      mark_by_overlap(histories, responses, marked);
      mark_by_overlap(responses, futures, marked);
      break;
    case SamenessStrategy::kSentenceCluster: {
      if (clusters.embeddings == nullptr) throw ContractError("sentence-cluster strategy needs word embeddings");
      std::vector<TokenSeq> reference;
      reference.insert(reference.end(), histories.begin(), histories.end());
      reference.insert(reference.end(), responses.begin(), responses.end());
      reference.insert(reference.end(), futures.begin(), futures.end());
      const SentenceEncoder encoder(*clusters.embeddings, reference, clusters.weight_a);
      auto threshold_for = [&](std::size_t turns) {
        return turns > 1 ? clusters.multi_turn_threshold : clusters.one_turn_threshold;
      };
      const auto h = single_pass_cluster(histories, encoder, threshold_for(history_turns));
      const auto r = single_pass_cluster(responses, encoder, clusters.one_turn_threshold);
      const auto f = single_pass_cluster(futures, encoder, threshold_for(future_turns));
      mark_by_classes(h, r, marked);
      mark_by_classes(r, f, marked);
      break;
    }
  }
  InformativenessSplit split;
  for (std::size_t i = 0; i < examples.size(); ++i) (marked[i] ? split.uninformative : split.other).push_back(i);
  return split;
}

}  // namespace sdkd
