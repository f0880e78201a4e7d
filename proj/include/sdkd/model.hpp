// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Encoder-decoder transformer in three variants:
//   conventional    history encoder + decoder (the student / baseline)
//   scenario        history and future encoded by the same encoder; every
//                   decoder block attends to both memories and merges the
//                   concatenated contexts back to model_dim (the teacher)
//   language_model  decoder blocks without cross-attention

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sdkd/tensor.hpp"

namespace sdkd {

enum class Variant { kConventional, kScenario, kLanguageModel };

std::string to_string(Variant variant);
Variant variant_from_string(const std::string& name);

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t model_dim = 64;
  std::size_t num_blocks = 2;
  std::size_t num_heads = 2;
  std::size_t ffn_dim = 128;
  double dropout_rate = 0.1;
  std::size_t max_sequence_length = 128;
  Variant variant = Variant::kConventional;
  // Standard deviation of the normal initializer (variance 1e-4).
  double init_std = 0.01;
  double layer_norm_epsilon = 1e-5;

  static ModelConfig paper_preset(std::size_t vocab_size, Variant variant);
  static ModelConfig desk_preset(std::size_t vocab_size, Variant variant);

  void validate() const;
  // Same shapes everywhere except the variant-specific tensors.
  bool architecture_matches(const ModelConfig& other) const;
  ModelConfig with_variant(Variant v) const {
    ModelConfig copy = *this;
    copy.variant = v;
    return copy;
  }

  bool operator==(const ModelConfig&) const = default;
};

// Named tensors in a fixed insertion order (the checkpoint manifest order).
template <typename T>
class ParameterSet {
 public:
  using Entry = std::pair<std::string, Tensor<T>>;

  void add(std::string name, Tensor<T> tensor);
  bool contains(const std::string& name) const;
  const Tensor<T>& at(const std::string& name) const;
  Tensor<T>& at(const std::string& name);

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t parameter_count() const;

  // Deep copy: fresh storage, no gradient history.
  ParameterSet clone() const;
  void zero_grad();

 private:
  std::vector<Entry> entries_;
};

// Every weight, bias and embedding ~ N(0, init_std^2); layer-norm gains 1,
// layer-norm biases 0. Deterministic in `seed` and identical across T.
template <typename T>
ParameterSet<T> init_params(const ModelConfig& config, std::uint64_t seed);

template <typename To, typename From>
ParameterSet<To> cast_params(const ParameterSet<From>& params) {
  ParameterSet<To> out;
  for (const auto& [name, tensor] : params.entries()) {
    out.add(name, cast<To>(tensor.detach()));
    out.at(name).set_requires_grad(tensor.requires_grad());
  }
  return out;
}

// Row-major (batch, length) id matrix with a validity mask (false = pad).
struct TokenMatrix {
  std::size_t batch = 0;
  std::size_t length = 0;
  std::vector<int> ids;
  std::vector<std::uint8_t> valid;

  static TokenMatrix from_rows(const std::vector<std::vector<int>>& rows, int pad_id);
  int id(std::size_t b, std::size_t t) const { return ids[b * length + t]; }
  bool is_valid(std::size_t b, std::size_t t) const { return valid[b * length + t] != 0; }
};

struct ForwardOptions {
  bool training = false;  // enables dropout
  std::mt19937_64* rng = nullptr;
};

template <typename T>
struct Memory {
  Tensor<T> states;                  // (batch, length, d)
  std::vector<std::uint8_t> valid;   // batch * length
  std::size_t batch = 0;
  std::size_t length = 0;
};

template <typename T>
struct DecodeOutput {
  Tensor<T> logits;                 // (batch, T', |V|)
  Tensor<T> distributions;          // softmax(logits)
  std::vector<Tensor<T>> hiddens;   // one (batch, T', d) per decoder block
};

// Outputs of one dual-context cross-attention.
template <typename T>
struct DualContext {
  Tensor<T> history_context;  // c_h, (batch, Tq, d)
  Tensor<T> future_context;   // c_f
  Tensor<T> concatenated;     // [c_h ; c_f], (batch, Tq, 2d)
  Tensor<T> merged;           // merge projection back to d
};

template <typename T>
class Transformer {
 public:
  Transformer(ModelConfig config, ParameterSet<T> params);

  const ModelConfig& config() const { return config_; }
  const ParameterSet<T>& params() const { return params_; }
  ParameterSet<T>& params() { return params_; }

  Memory<T> encode(const TokenMatrix& tokens, const ForwardOptions& options = {}) const;

  // Teacher-forced decoding of `target_input` (BOS-shifted gold prefix).
  // `future` must be present exactly for the scenario variant; `history`
  // must be absent exactly for the language-model variant.
  DecodeOutput<T> decode(const TokenMatrix& target_input, const Memory<T>* history, const Memory<T>* future,
                         const ForwardOptions& options = {}) const;

  // Cross-attention of block `block` for a given query stream.
  Tensor<T> cross_attention(std::size_t block, const Tensor<T>& query, const Memory<T>& memory) const;
  DualContext<T> dual_context_attention(std::size_t block, const Tensor<T>& query, const Memory<T>& history,
                                        const Memory<T>& future) const;

 private:
  Tensor<T> embed(const std::string& table, const TokenMatrix& tokens, const ForwardOptions& options) const;
  Tensor<T> attention(const std::string& prefix, const Tensor<T>& query, const Tensor<T>& keys,
                      const Tensor<T>& mask_bias) const;
  Tensor<T> feed_forward(const std::string& prefix, const Tensor<T>& x) const;
  Tensor<T> norm(const std::string& prefix, const Tensor<T>& x) const;
  Tensor<T> maybe_dropout(const Tensor<T>& x, const ForwardOptions& options) const;

  ModelConfig config_;
  ParameterSet<T> params_;
};

// Fixed sinusoidal position table, (length, d).
template <typename T>
Tensor<T> positional_encoding(std::size_t length, std::size_t dim);

// FNV-1a over names, shapes and raw value bytes; equal fingerprints mean
// bitwise-equal parameter sets (up to hash collisions).
template <typename T>
std::uint64_t parameter_fingerprint(const ParameterSet<T>& params);

// Names of the parameters making up the dual-context merge projections.
std::vector<std::string> merge_parameter_names(const ModelConfig& config);

}  // namespace sdkd
