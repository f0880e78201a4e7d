// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/corpus.hpp"

#include <cctype>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sdkd/errors.hpp"

namespace sdkd {

namespace {

std::size_t total_tokens(const std::vector<TokenSeq>& turns) {
  return std::accumulate(turns.begin(), turns.end(), std::size_t{0},
                         [](std::size_t acc, const TokenSeq& t) { return acc + t.size(); });
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

TokenSeq tokenize(const std::string& text) {
  TokenSeq tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (c < 128 && std::isspace(c)) {
      flush();
    } else if (c < 128 && std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, raw);
    } else {
      current.push_back(c < 128 ? static_cast<char>(std::tolower(c)) : raw);
    }
  }
  flush();
  return tokens;
}

std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::vector<std::vector<std::string>> read_corpus_eou(std::istream& in) {
  static const std::string kDelimiter = "__eou__";
  std::vector<std::vector<std::string>> dialogues;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> turns;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t pos = line.find(kDelimiter, start);
      std::string turn = trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (!turn.empty()) turns.push_back(std::move(turn));
      if (pos == std::string::npos) break;
      start = pos + kDelimiter.size();
    }
    if (!turns.empty()) dialogues.push_back(std::move(turns));
  }
  return dialogues;
}

std::vector<std::vector<std::string>> read_corpus_jsonl(std::istream& in) {
  std::vector<std::vector<std::string>> dialogues;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("turns") || !record["turns"].is_array()) {
      throw FormatError("corpus line " + std::to_string(line_no) + ": expected an object with a \"turns\" array");
    }
    std::vector<std::string> turns;
    for (const auto& t : record["turns"]) {
      if (!t.is_string()) throw FormatError("corpus line " + std::to_string(line_no) + ": turns must be strings");
      turns.push_back(t.get<std::string>());
    }
    dialogues.push_back(std::move(turns));
  }
  return dialogues;
}

CorpusFormat corpus_format_from_string(const std::string& name) {
  if (name == "A" || name == "a" || name == "eou") return CorpusFormat::kEou;
  if (name == "B" || name == "b" || name == "jsonl") return CorpusFormat::kJsonl;
  throw UsageError("unknown corpus format '" + name + "' (expected A/eou or B/jsonl)");
}

std::vector<Dialogue> read_dialogues(std::istream& in, CorpusFormat format) {
  auto raw = format == CorpusFormat::kEou ? read_corpus_eou(in) : read_corpus_jsonl(in);
  std::vector<Dialogue> dialogues;
  dialogues.reserve(raw.size());
  for (const auto& turns : raw) {
    Dialogue d;
    for (const auto& t : turns) d.push_back(tokenize(t));
    dialogues.push_back(std::move(d));
  }
  return dialogues;
}

std::size_t DialogueExample::history_length() const { return total_tokens(history); }
std::size_t DialogueExample::future_length() const { return total_tokens(future); }

std::vector<DialogueExample> window_dialogue(const Dialogue& dialogue, const WindowShape& shape) {
  if (shape.history_turns == 0 || shape.response_turns == 0 || shape.future_turns == 0 || shape.stride == 0) {
    throw ContractError("window shape counts and stride must be >= 1");
  }
  std::vector<DialogueExample> out;
  const std::size_t span = shape.span();
  for (std::size_t start = 0; start + span <= dialogue.size(); start += shape.stride) {
    DialogueExample ex;
    auto it = dialogue.begin() + static_cast<std::ptrdiff_t>(start);
    ex.history.assign(it, it + static_cast<std::ptrdiff_t>(shape.history_turns));
    it += static_cast<std::ptrdiff_t>(shape.history_turns);
    for (std::size_t r = 0; r < shape.response_turns; ++r, ++it) ex.response.insert(ex.response.end(), it->begin(), it->end());
    ex.future.assign(it, it + static_cast<std::ptrdiff_t>(shape.future_turns));
    out.push_back(std::move(ex));
  }
  return out;
}

bool LengthBounds::accepts(const DialogueExample& example) const {
  return response.contains(example.response_length()) && history.contains(example.history_length()) &&
         future.contains(example.future_length());
}

std::vector<DialogueExample> length_filter(const std::vector<DialogueExample>& examples, const LengthBounds& bounds) {
  std::vector<DialogueExample> kept;
  for (const auto& ex : examples)
    if (bounds.accepts(ex)) kept.push_back(ex);
  return kept;
}

std::vector<DialogueExample> prepare_examples(const std::vector<Dialogue>& dialogues, const WindowShape& shape,
                                              const LengthBounds& bounds) {
  std::vector<DialogueExample> out;
  for (const auto& d : dialogues) {
    for (auto& ex : window_dialogue(d, shape))
      if (bounds.accepts(ex)) out.push_back(std::move(ex));
  }
  return out;
}

void write_examples(std::ostream& out, const std::vector<DialogueExample>& examples) {
  for (const auto& ex : examples) {
    nlohmann::json record;
    record["history"] = nlohmann::json::array();
    for (const auto& t : ex.history) record["history"].push_back(join_tokens(t));
    record["response"] = join_tokens(ex.response);
    record["future"] = nlohmann::json::array();
    for (const auto& t : ex.future) record["future"].push_back(join_tokens(t));
    out << record.dump() << '\n';
  }
}

std::vector<DialogueExample> read_examples(std::istream& in) {
  std::vector<DialogueExample> examples;
  std::string line;
  std::size_t line_no = 0;
  auto split = [](const std::string& s) {
    TokenSeq t;
    std::istringstream is(s);
    std::string w;
    while (is >> w) t.push_back(w);
    return t;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto record = nlohmann::json::parse(line);
      DialogueExample ex;
      for (const auto& t : record.at("history")) ex.history.push_back(split(t.get<std::string>()));
      ex.response = split(record.at("response").get<std::string>());
      if (record.contains("future"))
        for (const auto& t : record.at("future")) ex.future.push_back(split(t.get<std::string>()));
      examples.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("examples line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return examples;
}

}  // namespace sdkd
