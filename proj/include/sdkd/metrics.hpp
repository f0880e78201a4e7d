// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Automatic metrics over token sequences and the analysis procedures built
// on them. Sentences are token lists from the pipeline tokenizer.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdkd/corpus.hpp"
#include "sdkd/embeddings.hpp"
#include "sdkd/inference.hpp"
#include "sdkd/model.hpp"
#include "sdkd/vocabulary.hpp"

namespace sdkd {

struct DistinctResult {
  double ratio = 0;
  std::size_t distinct = 0;
  std::size_t total = 0;
  bool defined = false;  // false when no response has n tokens
};

DistinctResult distinct_n(const std::vector<TokenSeq>& responses, std::size_t n);

// Mean over reference n-gram occurrences of log2 p_r / p_m. The generated
// distribution is smoothed only when a reference n-gram is missing from it:
// one pseudo-count spread evenly over the reference n-gram types.
double kl_metric(const std::vector<TokenSeq>& references, const std::vector<TokenSeq>& generated, std::size_t n);

// Corpus BLEU in percent: clipped n-gram precisions up to 4, brevity
// penalty, zero precisions floored at 1e-9.
double bleu(const std::vector<TokenSeq>& references, const std::vector<TokenSeq>& candidates);

struct PplResult {
  double ppl = 0;                    // mean of per-sentence perplexities
  std::vector<double> per_sentence;  // exp(mean token NLL)
  std::size_t excluded = 0;          // sentences with no scored tokens
};

// From per-sentence token NLLs (natural log).
PplResult corpus_ppl_from_nll(const std::vector<std::vector<double>>& token_nlls);

// Teacher-forced scoring of gold responses (+ eos). Scenario models also
// read the futures.
PplResult corpus_ppl(const Transformer<float>& model, const std::vector<EncodedExample>& examples,
                     std::size_t batch_size = 64);

struct EmbeddingScores {
  double average = 0;
  double greedy = 0;
  double extrema = 0;
  std::size_t pairs = 0;
  std::size_t skipped = 0;  // both sides without known tokens
};

EmbeddingScores embedding_metrics(const std::vector<TokenSeq>& references, const std::vector<TokenSeq>& candidates,
                                  const EmbeddingTable& embeddings);

struct CoherenceScore {
  double value = 0;
  std::size_t pairs = 0;
  std::size_t skipped = 0;
};

// Histories are flattened turn lists.
CoherenceScore coherence(const std::vector<TokenSeq>& histories, const std::vector<TokenSeq>& candidates,
                         const EmbeddingTable& embeddings);

double word_distribution_similarity(const std::vector<TokenSeq>& generated, const std::vector<TokenSeq>& references,
                                    std::size_t top_k = 2350);

struct PerturbationPoint {
  double sigma = 0;
  double mean_ppl = 0;
  double std_ppl = 0;
  std::vector<double> samples;

  nlohmann::json to_json() const;
};

// Mean corpus PPL of theta + N(0, sigma^2) for each sigma. sigma = 0 runs
// the unperturbed model once per sample, so it reproduces the base PPL.
std::vector<PerturbationPoint> perturbation_analysis(const Transformer<float>& model,
                                                     const std::vector<EncodedExample>& examples,
                                                     const std::vector<double>& sigmas, std::size_t samples_per_sigma,
                                                     std::uint64_t seed);

struct MetricsReport {
  std::optional<double> dist1, dist2, dist3;
  std::optional<double> kl_unigram, kl_bigram;
  std::optional<double> ppl;
  std::optional<double> bleu;
  std::optional<double> emb_average, emb_greedy, emb_extrema;
  std::optional<double> coherence;
  nlohmann::json generation;  // decoding settings
  std::string corpus_id;
  std::string model_id;
  nlohmann::json run_config;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
};

struct ImprovementResult {
  double multiplier = 1;
  std::vector<std::string> used;
  std::vector<std::string> skipped;  // missing or zero denominator
};

// Mean per-metric ratio b / a; ppl and both KL metrics use a / b.
ImprovementResult improvement_average(const MetricsReport& a, const MetricsReport& b);

// Generates for every example and fills the full battery. Embedding
// metrics are left empty without a table.
MetricsReport evaluate_model(const Transformer<float>& model, const Vocabulary& vocab,
                             const std::vector<DialogueExample>& examples, std::size_t max_length,
                             const DecodeConfig& decode, const EmbeddingTable* embeddings);

}  // namespace sdkd
