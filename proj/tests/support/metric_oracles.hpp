// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deliberately naive reference implementations: n-grams are joined strings
// held in flat vectors and counted by linear scans.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "sdkd/corpus.hpp"

namespace sdkd::oracle {

inline std::vector<std::string> ngrams(const TokenSeq& s, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    std::string g;
    for (std::size_t k = 0; k < n; ++k) g += s[i + k] + "\x1f";
    out.push_back(g);
  }
  return out;
}

inline std::vector<std::string> all_ngrams(const std::vector<TokenSeq>& corpus, std::size_t n) {
  std::vector<std::string> out;
  for (const auto& s : corpus)
    for (auto& g : ngrams(s, n)) out.push_back(g);
  return out;
}

inline std::size_t count_of(const std::vector<std::string>& bag, const std::string& g) {
  return static_cast<std::size_t>(std::count(bag.begin(), bag.end(), g));
}

inline std::vector<std::string> unique(std::vector<std::string> bag) {
  std::sort(bag.begin(), bag.end());
  bag.erase(std::unique(bag.begin(), bag.end()), bag.end());
  return bag;
}

inline double distinct(const std::vector<TokenSeq>& corpus, std::size_t n) {
  const auto bag = all_ngrams(corpus, n);
  if (bag.empty()) return 0;
  return static_cast<double>(unique(bag).size()) / static_cast<double>(bag.size());
}

// Average log2 ratio over reference occurrences; generated probabilities get
// one pseudo-count spread over the reference types whenever a reference
// n-gram is missing from the generated bag.
inline double kl(const std::vector<TokenSeq>& refs, const std::vector<TokenSeq>& gen, std::size_t n) {
  const auto r = all_ngrams(refs, n);
  const auto g = all_ngrams(gen, n);
  const auto types = unique(r);
  bool missing = false;
  for (const auto& t : types) missing = missing || count_of(g, t) == 0;
  double total = 0;
  for (const auto& occurrence : r) {
    const double pr = static_cast<double>(count_of(r, occurrence)) / static_cast<double>(r.size());
    double pm = static_cast<double>(count_of(g, occurrence));
    pm = missing ? (pm + 1.0 / static_cast<double>(types.size())) / (static_cast<double>(g.size()) + 1.0)
                 : pm / static_cast<double>(g.size());
    total += std::log2(pr / pm);
  }
  return total / static_cast<double>(r.size());
}

inline double bleu(const std::vector<TokenSeq>& refs, const std::vector<TokenSeq>& cands) {
  double r = 0, c = 0, log_p = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    r += static_cast<double>(refs[i].size());
    c += static_cast<double>(cands[i].size());
  }
  if (c == 0) return 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    double hit = 0, all = 0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const auto cg = ngrams(cands[i], n);
      const auto rg = ngrams(refs[i], n);
      all += static_cast<double>(cg.size());
      for (const auto& t : unique(cg)) hit += static_cast<double>(std::min(count_of(cg, t), count_of(rg, t)));
    }
    log_p += std::log(std::max(all > 0 ? hit / all : 0.0, 1e-9));
  }
  const double bp = c < r ? std::exp(1 - r / c) : 1.0;
  return 100 * bp * std::exp(log_p / 4);
}

inline double ppl(const std::vector<std::vector<double>>& token_nlls) {
  double total = 0;
  std::size_t used = 0;
  for (const auto& s : token_nlls) {
    if (s.empty()) continue;
    double m = 0;
    for (double x : s) m += x;
    total += std::exp(m / static_cast<double>(s.size()));
    ++used;
  }
  return used ? total / static_cast<double>(used) : 0;
}

inline double word_similarity(const std::vector<TokenSeq>& gen, const std::vector<TokenSeq>& refs, std::size_t top_k) {
  const auto rb = all_ngrams(refs, 1);
  const auto gb = all_ngrams(gen, 1);
  auto types = unique(rb);
  std::stable_sort(types.begin(), types.end(),
                   [&](const std::string& a, const std::string& b) { return count_of(rb, a) > count_of(rb, b); });
  if (types.size() > top_k) types.resize(top_k);
  double dot = 0, nr = 0, ng = 0;
  for (const auto& t : types) {
    const double a = static_cast<double>(count_of(rb, t));
    const double b = static_cast<double>(count_of(gb, t));
    dot += a * b;
    nr += a * a;
    ng += b * b;
  }
  return nr > 0 && ng > 0 ? dot / std::sqrt(nr * ng) : 0;
}

// Random short sentences over a small alphabet.
inline std::vector<TokenSeq> random_corpus(std::mt19937_64& rng, std::size_t sentences, std::size_t max_len,
                                           std::size_t alphabet) {
  std::uniform_int_distribution<std::size_t> len(0, max_len), word(0, alphabet - 1);
  std::vector<TokenSeq> out(sentences);
  for (auto& s : out) {
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s.push_back(std::string(1, static_cast<char>('a' + word(rng))));
  }
  return out;
}

}  // namespace sdkd::oracle
