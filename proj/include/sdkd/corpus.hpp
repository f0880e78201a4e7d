// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace sdkd {

using TokenSeq = std::vector<std::string>;
using Dialogue = std::vector<TokenSeq>;

// Lowercases ASCII letters, splits ASCII punctuation into single-character
// tokens and splits on whitespace. Non-ASCII bytes are kept as-is.
TokenSeq tokenize(const std::string& text);
std::string join_tokens(const TokenSeq& tokens);

// One dialogue per line, turns separated by the literal `__eou__`.
std::vector<std::vector<std::string>> read_corpus_eou(std::istream& in);
// One JSON object per line with a "turns" array of strings.
std::vector<std::vector<std::string>> read_corpus_jsonl(std::istream& in);

enum class CorpusFormat { kEou, kJsonl };
CorpusFormat corpus_format_from_string(const std::string& name);
std::vector<Dialogue> read_dialogues(std::istream& in, CorpusFormat format);

struct DialogueExample {
  std::vector<TokenSeq> history;
  TokenSeq response;
  std::vector<TokenSeq> future;

  std::size_t history_length() const;
  std::size_t future_length() const;
  std::size_t response_length() const { return response.size(); }

  bool operator==(const DialogueExample&) const = default;
};

struct WindowShape {
  std::size_t history_turns = 3;
  std::size_t response_turns = 1;
  std::size_t future_turns = 3;
  std::size_t stride = 1;

  std::size_t span() const { return history_turns + response_turns + future_turns; }
};

// Sliding windows over consecutive turns. Multi-turn responses are
// concatenated into one token sequence.
std::vector<DialogueExample> window_dialogue(const Dialogue& dialogue, const WindowShape& shape);

struct LengthRange {
  std::size_t min = 0;
  std::size_t max = 0;
  bool contains(std::size_t n) const { return n >= min && n <= max; }
};

struct LengthBounds {
  LengthRange response{5, 25};
  LengthRange history{25, 80};
  LengthRange future{25, 80};

  bool accepts(const DialogueExample& example) const;
};

std::vector<DialogueExample> length_filter(const std::vector<DialogueExample>& examples,
                                           const LengthBounds& bounds = {});

// Windows every dialogue then filters; ordered by dialogue index, then
// window offset.
std::vector<DialogueExample> prepare_examples(const std::vector<Dialogue>& dialogues, const WindowShape& shape,
                                              const LengthBounds& bounds = {});

// JSON-lines persistence of prepared examples: {"history": [...],
// "response": "...", "future": [...]} with space-joined tokens per turn.
void write_examples(std::ostream& out, const std::vector<DialogueExample>& examples);
std::vector<DialogueExample> read_examples(std::istream& in);

}  // namespace sdkd
