// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "sdkd/errors.hpp"

namespace sdkd {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> count_ngrams(const std::vector<TokenSeq>& sentences, std::size_t n, std::size_t* total) {
  std::map<Ngram, std::size_t> counts;
  std::size_t all = 0;
  for (const auto& s : sentences) {
    if (s.size() < n) continue;
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
      ++counts[Ngram(s.begin() + static_cast<std::ptrdiff_t>(i), s.begin() + static_cast<std::ptrdiff_t>(i + n))];
      ++all;
    }
  }
  if (total) *total = all;
  return counts;
}

std::vector<double> mean_vector(const TokenSeq& sentence, const EmbeddingTable& embeddings, std::size_t* known) {
  std::vector<double> v(embeddings.dim(), 0.0);
  std::size_t k = 0;
  for (const auto& t : sentence) {
    const auto* e = embeddings.find(t);
    if (!e) continue;
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += (*e)[j];
    ++k;
  }
  if (k)
    for (auto& x : v) x /= static_cast<double>(k);
  if (known) *known = k;
  return v;
}

std::vector<const std::vector<double>*> known_vectors(const TokenSeq& sentence, const EmbeddingTable& embeddings) {
  std::vector<const std::vector<double>*> out;
  for (const auto& t : sentence)
    if (const auto* e = embeddings.find(t)) out.push_back(e);
  return out;
}

double greedy_direction(const std::vector<const std::vector<double>*>& from,
                        const std::vector<const std::vector<double>*>& to) {
  if (from.empty() || to.empty()) return 0.0;
  double acc = 0;
  for (const auto* a : from) {
    double best = -1.0;
    for (const auto* b : to) best = std::max(best, cosine(*a, *b));
    acc += best;
  }
  return acc / static_cast<double>(from.size());
}

std::vector<double> extrema_vector(const std::vector<const std::vector<double>*>& vectors, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (const auto* v : vectors)
    for (std::size_t j = 0; j < dim; ++j)
      if (std::abs((*v)[j]) > std::abs(out[j])) out[j] = (*v)[j];
  return out;
}

}  // namespace

DistinctResult distinct_n(const std::vector<TokenSeq>& responses, std::size_t n) {
  if (n == 0) throw ContractError("distinct_n needs n >= 1");
  DistinctResult r;
  const auto counts = count_ngrams(responses, n, &r.total);
  r.distinct = counts.size();
  r.defined = r.total > 0;
  r.ratio = r.defined ? static_cast<double>(r.distinct) / static_cast<double>(r.total) : 0.0;
  return r;
}

double kl_metric(const std::vector<TokenSeq>& references, const std::vector<TokenSeq>& generated, std::size_t n) {
  if (n == 0) throw ContractError("kl_metric needs n >= 1");
  if (references.empty()) throw DataError("kl_metric: empty reference set");
  std::size_t ref_total = 0, gen_total = 0;
  const auto ref = count_ngrams(references, n, &ref_total);
  const auto gen = count_ngrams(generated, n, &gen_total);
  if (ref_total == 0) throw DataError("kl_metric: references contain no " + std::to_string(n) + "-grams");
  bool smooth = false;
  for (const auto& [g, _] : ref)
    if (!gen.count(g)) smooth = true;
  const double pseudo = 1.0 / static_cast<double>(ref.size());
  double acc = 0;
  for (const auto& [g, c] : ref) {
    const double pr = static_cast<double>(c) / static_cast<double>(ref_total);
    auto it = gen.find(g);
    const double cm = it == gen.end() ? 0.0 : static_cast<double>(it->second);
    const double pm = smooth ? (cm + pseudo) / (static_cast<double>(gen_total) + 1.0)
                             : cm / static_cast<double>(gen_total);
    acc += static_cast<double>(c) * std::log2(pr / pm);
  }
  return acc / static_cast<double>(ref_total);
}

double bleu(const std::vector<TokenSeq>& references, const std::vector<TokenSeq>& candidates) {
  if (references.empty() || candidates.empty()) throw DataError("bleu: empty corpus");
  if (references.size() != candidates.size()) throw DimensionError("bleu: references and candidates differ in count");
  constexpr double kFloor = 1e-9;
  std::size_t ref_len = 0, cand_len = 0;
  double log_sum = 0;
  std::vector<std::size_t> matched(4, 0), total(4, 0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ref_len += references[i].size();
    cand_len += candidates[i].size();
    for (std::size_t n = 1; n <= 4; ++n) {
      std::size_t cand_total = 0;
      const auto cand = count_ngrams({candidates[i]}, n, &cand_total);
      const auto ref = count_ngrams({references[i]}, n, nullptr);
      for (const auto& [g, c] : cand) {
        auto it = ref.find(g);
        matched[n - 1] += it == ref.end() ? 0 : std::min(c, it->second);
      }
      total[n - 1] += cand_total;
    }
  }
  if (cand_len == 0) return 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    const double p = total[n] ? static_cast<double>(matched[n]) / static_cast<double>(total[n]) : 0.0;
    log_sum += std::log(std::max(p, kFloor));
  }
  const double bp =
      cand_len < ref_len ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len)) : 1.0;
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

PplResult corpus_ppl_from_nll(const std::vector<std::vector<double>>& token_nlls) {
  PplResult r;
  double acc = 0;
  for (const auto& s : token_nlls) {
    if (s.empty()) {
      ++r.excluded;
      continue;
    }
    double total = 0;
    for (double v : s) total += v;
    r.per_sentence.push_back(std::exp(total / static_cast<double>(s.size())));
    acc += r.per_sentence.back();
  }
  if (!r.per_sentence.empty()) r.ppl = acc / static_cast<double>(r.per_sentence.size());
  return r;
}

PplResult corpus_ppl(const Transformer<float>& model, const std::vector<EncodedExample>& examples,
                     std::size_t batch_size) {
  if (examples.empty()) throw DataError("corpus_ppl: no examples");
  NoGradGuard guard;
  const Variant variant = model.config().variant;
  const bool with_future = variant == Variant::kScenario;
  std::vector<std::vector<double>> nlls;
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
    const auto& target = batch.response_target;
    const std::size_t vocab = out.distributions.dim(2);
    const auto probs = out.distributions.values();
    for (std::size_t b = 0; b < target.batch; ++b) {
      std::vector<double> row;
      if (!examples[batch.example_indices[b]].response.empty()) {
        for (std::size_t t = 0; t < target.length; ++t) {
          if (!target.is_valid(b, t)) continue;
          const double p = probs[(b * target.length + t) * vocab + static_cast<std::size_t>(target.id(b, t))];
          row.push_back(-std::log(std::max(p, 1e-12)));
        }
      }
      nlls.push_back(std::move(row));
    }
  }
  return corpus_ppl_from_nll(nlls);
}

EmbeddingScores embedding_metrics(const std::vector<TokenSeq>& references, const std::vector<TokenSeq>& candidates,
                                  const EmbeddingTable& embeddings) {
  if (references.size() != candidates.size()) throw DimensionError("embedding_metrics: unaligned pairs");
  EmbeddingScores s;
  for (std::size_t i = 0; i < references.size(); ++i) {
    const auto rv = known_vectors(references[i], embeddings);
    const auto cv = known_vectors(candidates[i], embeddings);
    if (rv.empty() && cv.empty()) {
      ++s.skipped;
      continue;
    }
    const auto rm = mean_vector(references[i], embeddings, nullptr);
    const auto cm = mean_vector(candidates[i], embeddings, nullptr);
    s.average += cosine(rm, cm);
    s.greedy += 0.5 * (greedy_direction(rv, cv) + greedy_direction(cv, rv));
    s.extrema += cosine(extrema_vector(rv, embeddings.dim()), extrema_vector(cv, embeddings.dim()));
    ++s.pairs;
  }
  if (s.pairs) {
    const double n = static_cast<double>(s.pairs);
    s.average /= n;
    s.greedy /= n;
    s.extrema /= n;
  }
  return s;
}

CoherenceScore coherence(const std::vector<TokenSeq>& histories, const std::vector<TokenSeq>& candidates,
                         const EmbeddingTable& embeddings) {
  if (histories.size() != candidates.size()) throw DimensionError("coherence: unaligned pairs");
  CoherenceScore s;
  for (std::size_t i = 0; i < histories.size(); ++i) {
    std::size_t kh = 0, kc = 0;
    const auto hm = mean_vector(histories[i], embeddings, &kh);
    const auto cm = mean_vector(candidates[i], embeddings, &kc);
    if (kh == 0 && kc == 0) {
      ++s.skipped;
      continue;
    }
    s.value += cosine(hm, cm);
    ++s.pairs;
  }
  if (s.pairs) s.value /= static_cast<double>(s.pairs);
  return s;
}

double word_distribution_similarity(const std::vector<TokenSeq>& generated, const std::vector<TokenSeq>& references,
                                    std::size_t top_k) {
  if (top_k == 0) throw ContractError("top_k must be positive");
  const auto ref = count_ngrams(references, 1, nullptr);
  const auto gen = count_ngrams(generated, 1, nullptr);
  std::vector<std::pair<Ngram, std::size_t>> ranked(ref.begin(), ref.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > top_k) ranked.resize(top_k);
  std::vector<double> rv, gv;
  for (const auto& [w, c] : ranked) {
    rv.push_back(static_cast<double>(c));
    auto it = gen.find(w);
    gv.push_back(it == gen.end() ? 0.0 : static_cast<double>(it->second));
  }
  return cosine(rv, gv);
}

nlohmann::json PerturbationPoint::to_json() const {
  return {{"sigma", sigma}, {"mean_ppl", mean_ppl}, {"std_ppl", std_ppl}, {"samples", samples}};
}

std::vector<PerturbationPoint> perturbation_analysis(const Transformer<float>& model,
                                                     const std::vector<EncodedExample>& examples,
                                                     const std::vector<double>& sigmas, std::size_t samples_per_sigma,
                                                     std::uint64_t seed) {
  if (sigmas.empty() || sigmas.front() != 0.0) throw ContractError("perturbation sigmas must begin at 0");
  if (!std::is_sorted(sigmas.begin(), sigmas.end())) throw ContractError("perturbation sigmas must be ascending");
  if (samples_per_sigma == 0) throw ContractError("samples_per_sigma must be positive");
  std::mt19937_64 rng(seed);
  std::vector<PerturbationPoint> series;
  for (double sigma : sigmas) {
    PerturbationPoint point;
    point.sigma = sigma;
    for (std::size_t s = 0; s < samples_per_sigma; ++s) {
      if (sigma == 0.0) {
        point.samples.push_back(corpus_ppl(model, examples).ppl);
        continue;
      }
      auto params = model.params().clone();
      std::normal_distribution<double> noise(0.0, sigma);
      for (auto& [name, tensor] : params.entries())
        for (float& v : tensor.mutable_values()) v = static_cast<float>(static_cast<double>(v) + noise(rng));
      const Transformer<float> perturbed(model.config(), std::move(params));
      point.samples.push_back(corpus_ppl(perturbed, examples).ppl);
    }
    double mean = 0;
    for (double v : point.samples) mean += v;
    mean /= static_cast<double>(point.samples.size());
    double var = 0;
    for (double v : point.samples) var += (v - mean) * (v - mean);
    point.mean_ppl = mean;
    point.std_ppl = point.samples.size() > 1 ? std::sqrt(var / static_cast<double>(point.samples.size() - 1)) : 0.0;
    series.push_back(std::move(point));
  }
  return series;
}

namespace {

struct MetricField {
  const char* name;
  std::optional<double> MetricsReport::*member;
  bool lower_is_better;
};

constexpr MetricField kFields[] = {
    {"dist1", &MetricsReport::dist1, false},           {"dist2", &MetricsReport::dist2, false},
    {"dist3", &MetricsReport::dist3, false},           {"kl_unigram", &MetricsReport::kl_unigram, true},
    {"kl_bigram", &MetricsReport::kl_bigram, true},    {"ppl", &MetricsReport::ppl, true},
    {"bleu", &MetricsReport::bleu, false},             {"emb_average", &MetricsReport::emb_average, false},
    {"emb_greedy", &MetricsReport::emb_greedy, false}, {"emb_extrema", &MetricsReport::emb_extrema, false},
    {"coherence", &MetricsReport::coherence, false},
};

}  // namespace

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : kFields) {
    const auto& v = this->*(f.member);
    j[f.name] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  }
  j["generation"] = generation;
  j["corpus_id"] = corpus_id;
  j["model_id"] = model_id;
  if (!run_config.is_null()) j["run_config"] = run_config;
  return j;
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("metrics report must be a JSON object");
  MetricsReport r;
  for (const auto& f : kFields) {
    if (j.contains(f.name) && j[f.name].is_number()) r.*(f.member) = j[f.name].get<double>();
  }
  r.generation = j.value("generation", nlohmann::json());
  r.corpus_id = j.value("corpus_id", std::string());
  r.model_id = j.value("model_id", std::string());
  r.run_config = j.value("run_config", nlohmann::json());
  return r;
}

ImprovementResult improvement_average(const MetricsReport& a, const MetricsReport& b) {
  ImprovementResult r;
  double acc = 0;
  for (const auto& f : kFields) {
    const auto& va = a.*(f.member);
    const auto& vb = b.*(f.member);
    if (!va || !vb) continue;
    const double denominator = f.lower_is_better ? *vb : *va;
    if (denominator == 0) {
      r.skipped.push_back(f.name);
      continue;
    }
    acc += f.lower_is_better ? *va / *vb : *vb / *va;
    r.used.push_back(f.name);
  }
  if (!r.used.empty()) r.multiplier = acc / static_cast<double>(r.used.size());
  return r;
}

MetricsReport evaluate_model(const Transformer<float>& model, const Vocabulary& vocab,
                             const std::vector<DialogueExample>& examples, std::size_t max_length,
                             const DecodeConfig& decode, const EmbeddingTable* embeddings) {
  if (examples.empty()) throw DataError("evaluate: no examples");
  MetricsReport report;
  report.generation = {{"strategy", to_string(decode.strategy)},
                       {"beam_width", decode.beam_width},
                       {"max_length", decode.max_length},
                       {"length_penalty", decode.length_penalty}};
  const auto encoded = encode_examples(vocab, examples, max_length);
  report.ppl = corpus_ppl(model, encoded).ppl;
  if (model.config().variant != Variant::kConventional) return report;

  std::vector<TokenSeq> references, candidates, histories;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto h = generate(model, encoded[i].history, decode);
    candidates.push_back(vocab.decode(h.tokens));
    references.push_back(examples[i].response);
    TokenSeq flat;
    for (const auto& turn : examples[i].history) flat.insert(flat.end(), turn.begin(), turn.end());
    histories.push_back(std::move(flat));
  }
  report.dist1 = distinct_n(candidates, 1).ratio;
  report.dist2 = distinct_n(candidates, 2).ratio;
  report.dist3 = distinct_n(candidates, 3).ratio;
  if (distinct_n(references, 1).defined) report.kl_unigram = kl_metric(references, candidates, 1);
  if (distinct_n(references, 2).defined) report.kl_bigram = kl_metric(references, candidates, 2);
  report.bleu = bleu(references, candidates);
  if (embeddings) {
    const auto e = embedding_metrics(references, candidates, *embeddings);
    report.emb_average = e.average;
    report.emb_greedy = e.greedy;
    report.emb_extrema = e.extrema;
    report.coherence = coherence(histories, candidates, *embeddings).value;
  }
  return report;
}

}  // namespace sdkd
