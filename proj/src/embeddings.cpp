// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/embeddings.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "sdkd/errors.hpp"

namespace sdkd {

void EmbeddingTable::set(const std::string& token, std::vector<double> vector) {
  if (vector.size() != dim_) {
    throw DimensionError("embedding for '" + token + "' has " + std::to_string(vector.size()) + " values, table dim " +
                         std::to_string(dim_));
  }
  auto it = index_.find(token);
  if (it != index_.end()) {
    vectors_[it->second] = std::move(vector);
    return;
  }
  index_.emplace(token, tokens_.size());
  tokens_.push_back(token);
  vectors_.push_back(std::move(vector));
}

const std::vector<double>* EmbeddingTable::find(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? nullptr : &vectors_[it->second];
}

void EmbeddingTable::write(std::ostream& out) const {
  out << tokens_.size() << ' ' << dim_ << '\n';
  out << std::setprecision(9);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i];
    for (double v : vectors_[i]) out << ' ' << v;
    out << '\n';
  }
}

EmbeddingTable EmbeddingTable::read(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw FormatError("embedding file: missing header");
  std::istringstream hs(header);
  std::size_t count = 0, dim = 0;
  if (!(hs >> count >> dim) || dim == 0) throw FormatError("embedding file: header must be '<count> <dim>'");
  EmbeddingTable table(dim);
  std::string line;
  std::size_t line_no = 1;
  while (table.size() < count && std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    std::vector<double> v(dim);
    for (auto& x : v) {
      if (!(ls >> x)) throw FormatError("embedding file line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(dim) + " values");
    }
    table.set(token, std::move(v));
  }
  if (table.size() != count) {
    throw FormatError("embedding file: header promises " + std::to_string(count) + " rows, found " +
                      std::to_string(table.size()));
  }
  return table;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingTable train_word_embeddings(const std::vector<TokenSeq>& sentences, const SkipGramOptions& options) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& s : sentences)
    for (const auto& t : s) {
      ++counts[t];
      ++total;
    }
  if (total < 100) throw DataError("embedding corpus too small: " + std::to_string(total) + " tokens (need >= 100)");
  if (options.dim == 0) throw ContractError("embedding dim must be positive");

  std::vector<std::string> words;
  std::map<std::string, std::size_t> index;
  std::vector<double> noise_weights;
  for (const auto& [w, c] : counts) {
    index.emplace(w, words.size());
    words.push_back(w);
    noise_weights.push_back(std::pow(static_cast<double>(c), 0.75));
  }
  const std::size_t n = words.size(), d = options.dim;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d), 0.5 / static_cast<double>(d));
  std::vector<double> in(n * d), out(n * d, 0.0);
  for (auto& v : in) v = init(rng);
  std::discrete_distribution<std::size_t> noise(noise_weights.begin(), noise_weights.end());
  std::uniform_int_distribution<std::size_t> shrink(0, options.window > 0 ? options.window - 1 : 0);

  std::vector<std::vector<std::size_t>> encoded;
  for (const auto& s : sentences) {
    std::vector<std::size_t> ids;
    for (const auto& t : s) ids.push_back(index.at(t));
    encoded.push_back(std::move(ids));
  }
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  const double steps_total = static_cast<double>(options.epochs * total);
  double processed = 0;
  std::vector<double> accum(d);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (const auto& sent : encoded) {
      for (std::size_t pos = 0; pos < sent.size(); ++pos, ++processed) {
        const double lr = std::max(options.learning_rate * 1e-4, options.learning_rate * (1.0 - processed / steps_total));
        const std::size_t reach = options.window - shrink(rng);
        const std::size_t lo = pos >= reach ? pos - reach : 0;
        const std::size_t hi = std::min(sent.size() - 1, pos + reach);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          double* center = &in[sent[c] * d];
          std::fill(accum.begin(), accum.end(), 0.0);
          for (std::size_t k = 0; k <= options.negatives; ++k) {
            std::size_t target = sent[pos];
            double label = 1.0;
            if (k > 0) {
              target = noise(rng);
              if (target == sent[pos]) continue;
              label = 0.0;
            }
            double* ctx = &out[target * d];
            double dot = 0;
            for (std::size_t j = 0; j < d; ++j) dot += center[j] * ctx[j];
            const double g = lr * (label - sigmoid(dot));
            for (std::size_t j = 0; j < d; ++j) {
              accum[j] += g * ctx[j];
              ctx[j] += g * center[j];
            }
          }
          for (std::size_t j = 0; j < d; ++j) center[j] += accum[j];
        }
      }
    }
  }
  EmbeddingTable table(d);
  for (std::size_t i = 0; i < n; ++i) table.set(words[i], std::vector<double>(in.begin() + i * d, in.begin() + (i + 1) * d));
  return table;
}

}  // namespace sdkd
