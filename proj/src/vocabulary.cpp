// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/vocabulary.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "sdkd/errors.hpp"

namespace sdkd {

Vocabulary::Vocabulary() {
  for (const char* t : {"<pad>", "<unk>", "<bos>", "<eos>"}) append(t);
}

void Vocabulary::append(const std::string& token) {
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<TokenSeq>& sentences, std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : sentences)
    for (const auto& t : s) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // std::map iteration is already lexicographic; stable sort keeps it for ties.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  const std::size_t room = max_size > kReserved ? max_size - kReserved : 0;
  for (const auto& [token, count] : ranked) {
    if (vocab.size() - kReserved >= room) break;
    if (vocab.contains(token)) continue;
    vocab.append(token);
  }
  return vocab;
}

Vocabulary Vocabulary::build(const std::vector<DialogueExample>& examples, std::size_t max_size) {
  std::vector<TokenSeq> sentences;
  for (const auto& ex : examples) {
    sentences.insert(sentences.end(), ex.history.begin(), ex.history.end());
    sentences.push_back(ex.response);
    sentences.insert(sentences.end(), ex.future.begin(), ex.future.end());
  }
  return build(sentences, max_size);
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary vocab;
  if (tokens.size() < kReserved) throw FormatError("vocabulary lists fewer than 4 reserved tokens");
  for (std::size_t i = 0; i < kReserved; ++i) {
    if (tokens[i] != vocab.tokens_[i]) throw FormatError("vocabulary reserved token mismatch at id " + std::to_string(i));
  }
  for (std::size_t i = kReserved; i < tokens.size(); ++i) {
    if (vocab.contains(tokens[i])) throw FormatError("duplicate vocabulary token '" + tokens[i] + "'");
    vocab.append(tokens[i]);
  }
  return vocab;
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw VocabularyError("token id " + std::to_string(id) + " outside vocabulary of size " +
                          std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const TokenSeq& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id_of(t));
  return ids;
}

TokenSeq Vocabulary::decode(const std::vector<int>& ids) const {
  TokenSeq out;
  for (int id : ids) {
    if (id == kEos) break;
    if (id == kPad || id == kBos) continue;
    out.push_back(token_of(id));
  }
  return out;
}

void Vocabulary::write(std::ostream& out) const {
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::read(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) tokens.push_back(line);
  }
  return from_tokens(tokens);
}

std::vector<int> encode_turns(const Vocabulary& vocab, const std::vector<TokenSeq>& turns) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i) ids.push_back(Vocabulary::kEos);
    for (const auto& t : turns[i]) ids.push_back(vocab.id_of(t));
  }
  return ids;
}

EncodedExample encode_example(const Vocabulary& vocab, const DialogueExample& example, std::size_t max_length) {
  if (max_length < 2) throw ContractError("max_length must be at least 2");
  EncodedExample enc;
  enc.history = encode_turns(vocab, example.history);
  if (enc.history.size() > max_length)
    enc.history.erase(enc.history.begin(), enc.history.end() - static_cast<std::ptrdiff_t>(max_length));
  enc.future = encode_turns(vocab, example.future);
  if (enc.future.size() > max_length) enc.future.resize(max_length);
  enc.response = vocab.encode(example.response);
  if (enc.response.size() > max_length - 1) enc.response.resize(max_length - 1);
  if (enc.history.empty()) enc.history.push_back(Vocabulary::kUnk);
  return enc;
}

std::vector<EncodedExample> encode_examples(const Vocabulary& vocab, const std::vector<DialogueExample>& examples,
                                            std::size_t max_length) {
  std::vector<EncodedExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(encode_example(vocab, ex, max_length));
  return out;
}

std::size_t Batch::target_tokens() const {
  return static_cast<std::size_t>(std::count(response_target.valid.begin(), response_target.valid.end(), 1));
}

Batch make_batch(const std::vector<EncodedExample>& examples, const std::vector<std::size_t>& indices,
                 bool include_future) {
  if (indices.empty()) throw DataError("cannot build an empty batch");
  std::vector<std::vector<int>> history, future, input, target;
  Batch batch;
  for (std::size_t i : indices) {
    const auto& ex = examples.at(i);
    history.push_back(ex.history);
    std::vector<int> in{Vocabulary::kBos};
    in.insert(in.end(), ex.response.begin(), ex.response.end());
    std::vector<int> out(ex.response.begin(), ex.response.end());
    out.push_back(Vocabulary::kEos);
    input.push_back(std::move(in));
    target.push_back(std::move(out));
    batch.history_lengths.push_back(ex.history.size());
    batch.response_lengths.push_back(ex.response.size() + 1);
    if (include_future) {
      future.push_back(ex.future.empty() ? std::vector<int>{Vocabulary::kUnk} : ex.future);
      batch.future_lengths.push_back(future.back().size());
    }
  }
  batch.history = TokenMatrix::from_rows(history, Vocabulary::kPad);
  if (include_future) batch.future = TokenMatrix::from_rows(future, Vocabulary::kPad);
  batch.response_input = TokenMatrix::from_rows(input, Vocabulary::kPad);
  batch.response_target = TokenMatrix::from_rows(target, Vocabulary::kPad);
  batch.example_indices = indices;
  return batch;
}

std::vector<Batch> batchify(const std::vector<EncodedExample>& examples, std::size_t batch_size, std::uint64_t seed,
                            bool include_future) {
  if (batch_size == 0) throw ContractError("batch_size must be positive");
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                 order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + batch_size)));
    batches.push_back(make_batch(examples, idx, include_future));
  }
  return batches;
}

std::vector<Batch> sequential_batches(const std::vector<EncodedExample>& examples, std::size_t batch_size,
                                      bool include_future) {
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < examples.size(); start += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(examples.size(), start + batch_size); ++i) idx.push_back(i);
    batches.push_back(make_batch(examples, idx, include_future));
  }
  return batches;
}

}  // namespace sdkd
