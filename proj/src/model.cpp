// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/model.hpp"

#include <cmath>
#include <unordered_map>

#include "sdkd/errors.hpp"

namespace sdkd {

namespace {

constexpr double kMaskedScore = -1e9;

std::string block_name(const char* stack, std::size_t i) {
  return std::string(stack) + ".block" + std::to_string(i);
}

// Additive attention bias, (batch, tq, tk): 0 where attending is allowed.
template <typename T>
Tensor<T> attention_bias(std::size_t batch, std::size_t tq, std::size_t tk, const std::vector<std::uint8_t>& key_valid,
                         bool causal) {
  std::vector<T> bias(batch * tq * tk, T(0));
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t q = 0; q < tq; ++q)
      for (std::size_t k = 0; k < tk; ++k) {
        const bool blocked = !key_valid[b * tk + k] || (causal && k > q);
        if (blocked) bias[(b * tq + q) * tk + k] = T(kMaskedScore);
      }
  return Tensor<T>({batch, tq, tk}, std::move(bias));
}

}  // namespace

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::kConventional:
      return "conventional";
    case Variant::kScenario:
      return "scenario";
    case Variant::kLanguageModel:
      return "language_model";
  }
  return "conventional";
}

Variant variant_from_string(const std::string& name) {
  if (name == "conventional") return Variant::kConventional;
  if (name == "scenario") return Variant::kScenario;
  if (name == "language_model") return Variant::kLanguageModel;
  throw FormatError("unknown model variant '" + name + "'");
}

ModelConfig ModelConfig::paper_preset(std::size_t vocab_size, Variant variant) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.model_dim = 256;
  c.num_blocks = 2;
  c.num_heads = 4;
  c.ffn_dim = 1024;
  c.variant = variant;
  return c;
}

ModelConfig ModelConfig::desk_preset(std::size_t vocab_size, Variant variant) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.model_dim = 64;
  c.num_blocks = 2;
  c.num_heads = 2;
  c.ffn_dim = 128;
  c.variant = variant;
  return c;
}

void ModelConfig::validate() const {
  if (vocab_size < 5) throw ContractError("vocab_size must cover the 4 reserved tokens plus at least one word");
  if (model_dim == 0 || num_heads == 0 || model_dim % num_heads != 0) {
    throw ContractError("model_dim " + std::to_string(model_dim) + " not divisible by num_heads " +
                        std::to_string(num_heads));
  }
  if (num_blocks == 0 || ffn_dim == 0 || max_sequence_length == 0) {
    throw ContractError("num_blocks, ffn_dim and max_sequence_length must be positive");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ContractError("dropout_rate must be in [0, 1)");
  if (init_std <= 0.0) throw ContractError("init_std must be positive");
}

bool ModelConfig::architecture_matches(const ModelConfig& other) const {
  return vocab_size == other.vocab_size && model_dim == other.model_dim && num_blocks == other.num_blocks &&
         num_heads == other.num_heads && ffn_dim == other.ffn_dim &&
         max_sequence_length == other.max_sequence_length;
}

template <typename T>
void ParameterSet<T>::add(std::string name, Tensor<T> tensor) {
  if (contains(name)) throw ContractError("duplicate parameter '" + name + "'");
  entries_.emplace_back(std::move(name), std::move(tensor));
}

template <typename T>
bool ParameterSet<T>::contains(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.first == name) return true;
  return false;
}

template <typename T>
const Tensor<T>& ParameterSet<T>::at(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.first == name) return e.second;
  throw ContractError("no parameter named '" + name + "'");
}

template <typename T>
Tensor<T>& ParameterSet<T>::at(const std::string& name) {
  for (auto& e : entries_)
    if (e.first == name) return e.second;
  throw ContractError("no parameter named '" + name + "'");
}

template <typename T>
std::size_t ParameterSet<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.numel();
  return n;
}

template <typename T>
ParameterSet<T> ParameterSet<T>::clone() const {
  ParameterSet out;
  for (const auto& [name, tensor] : entries_) {
    Tensor<T> copy = tensor.detach();
    copy.set_requires_grad(tensor.requires_grad());
    out.add(name, std::move(copy));
  }
  return out;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

template <typename T>
ParameterSet<T> init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, config.init_std);
  ParameterSet<T> params;
  const std::size_t d = config.model_dim;

  auto random = [&](const std::string& name, Shape shape) {
    std::vector<T> values(shape_numel(shape));
    for (auto& v : values) v = static_cast<T>(normal(rng));
    params.add(name, Tensor<T>(std::move(shape), std::move(values), true));
  };
  auto linear = [&](const std::string& name, std::size_t in, std::size_t out) {
    random(name + ".weight", {in, out});
    random(name + ".bias", {out});
  };
  auto norm = [&](const std::string& name) {
    params.add(name + ".gain", Tensor<T>::full({d}, T(1), true));
    params.add(name + ".bias", Tensor<T>::zeros({d}, true));
  };
  auto attention = [&](const std::string& name) {
    linear(name + ".query", d, d);
    linear(name + ".key", d, d);
    linear(name + ".value", d, d);
    linear(name + ".output", d, d);
  };
  auto ffn = [&](const std::string& name) {
    linear(name + ".inner", d, config.ffn_dim);
    linear(name + ".outer", config.ffn_dim, d);
  };

  const bool has_encoder = config.variant != Variant::kLanguageModel;
  if (has_encoder) random("encoder.embedding", {config.vocab_size, d});
  random("decoder.embedding", {config.vocab_size, d});
  if (has_encoder) {
    for (std::size_t i = 0; i < config.num_blocks; ++i) {
      const std::string b = block_name("encoder", i);
      attention(b + ".self_attn");
      norm(b + ".norm1");
      ffn(b + ".ffn");
      norm(b + ".norm2");
    }
  }
  for (std::size_t i = 0; i < config.num_blocks; ++i) {
    const std::string b = block_name("decoder", i);
    attention(b + ".self_attn");
    norm(b + ".norm1");
    if (has_encoder) {
      attention(b + ".cross_attn");
      if (config.variant == Variant::kScenario) linear(b + ".merge", 2 * d, d);
      norm(b + ".norm2");
    }
    ffn(b + ".ffn");
    norm(b + ".norm3");
  }
  linear("output", d, config.vocab_size);
  return params;
}

std::vector<std::string> merge_parameter_names(const ModelConfig& config) {
  std::vector<std::string> names;
  if (config.variant != Variant::kScenario) return names;
  for (std::size_t i = 0; i < config.num_blocks; ++i) {
    names.push_back(block_name("decoder", i) + ".merge.weight");
    names.push_back(block_name("decoder", i) + ".merge.bias");
  }
  return names;
}

TokenMatrix TokenMatrix::from_rows(const std::vector<std::vector<int>>& rows, int pad_id) {
  TokenMatrix m;
  m.batch = rows.size();
  for (const auto& r : rows) m.length = std::max(m.length, r.size());
  if (m.batch == 0 || m.length == 0) throw DataError("token matrix needs at least one non-empty row");
  m.ids.assign(m.batch * m.length, pad_id);
  m.valid.assign(m.batch * m.length, 0);
  for (std::size_t b = 0; b < rows.size(); ++b)
    for (std::size_t t = 0; t < rows[b].size(); ++t) {
      m.ids[b * m.length + t] = rows[b][t];
      m.valid[b * m.length + t] = 1;
    }
  return m;
}

template <typename T>
Tensor<T> positional_encoding(std::size_t length, std::size_t dim) {
  std::vector<T> table(length * dim);
  for (std::size_t pos = 0; pos < length; ++pos)
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
      const double angle = static_cast<double>(pos) * rate;
      table[pos * dim + i] = static_cast<T>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  return Tensor<T>({length, dim}, std::move(table));
}

template <typename T>
Transformer<T>::Transformer(ModelConfig config, ParameterSet<T> params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
}

template <typename T>
Tensor<T> Transformer<T>::maybe_dropout(const Tensor<T>& x, const ForwardOptions& options) const {
  if (!options.training || config_.dropout_rate <= 0.0) return x;
  if (options.rng == nullptr) throw ContractError("training forward pass needs an rng for dropout");
  return dropout(x, static_cast<T>(config_.dropout_rate), *options.rng);
}

template <typename T>
Tensor<T> Transformer<T>::embed(const std::string& table, const TokenMatrix& tokens,
                                const ForwardOptions& options) const {
  if (tokens.length > config_.max_sequence_length) {
    throw ContractError("sequence length " + std::to_string(tokens.length) + " exceeds max_sequence_length " +
                        std::to_string(config_.max_sequence_length));
  }
  const std::size_t d = config_.model_dim;
  Tensor<T> x = embedding(params_.at(table), std::span<const int>(tokens.ids), {tokens.batch, tokens.length});
  x = scale(x, static_cast<T>(std::sqrt(static_cast<double>(d))));
  x = add(x, positional_encoding<T>(tokens.length, d));
  return maybe_dropout(x, options);
}

template <typename T>
Tensor<T> Transformer<T>::norm(const std::string& prefix, const Tensor<T>& x) const {
  return layer_norm(x, params_.at(prefix + ".gain"), params_.at(prefix + ".bias"),
                    static_cast<T>(config_.layer_norm_epsilon));
}

template <typename T>
Tensor<T> Transformer<T>::attention(const std::string& prefix, const Tensor<T>& query, const Tensor<T>& keys,
                                    const Tensor<T>& mask_bias) const {
  auto proj = [&](const char* which, const Tensor<T>& x) {
    return affine(x, params_.at(prefix + "." + which + ".weight"), params_.at(prefix + "." + which + ".bias"));
  };
  const Tensor<T> q = proj("query", query);
  const Tensor<T> k = proj("key", keys);
  const Tensor<T> v = proj("value", keys);
  const std::size_t heads = config_.num_heads;
  const std::size_t width = config_.model_dim / heads;
  const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(width)));
  std::vector<Tensor<T>> per_head;
  per_head.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Tensor<T> qh = heads == 1 ? q : slice(q, 2, h * width, width);
    Tensor<T> kh = heads == 1 ? k : slice(k, 2, h * width, width);
    Tensor<T> vh = heads == 1 ? v : slice(v, 2, h * width, width);
    Tensor<T> scores = add(scale(matmul(qh, transpose(kh)), inv_sqrt), mask_bias);
    per_head.push_back(matmul(softmax(scores, 2), vh));
  }
  Tensor<T> context = heads == 1 ? per_head.front() : concat(per_head, 2);
  return proj("output", context);
}

template <typename T>
Tensor<T> Transformer<T>::feed_forward(const std::string& prefix, const Tensor<T>& x) const {
  Tensor<T> hidden = relu(affine(x, params_.at(prefix + ".inner.weight"), params_.at(prefix + ".inner.bias")));
  return affine(hidden, params_.at(prefix + ".outer.weight"), params_.at(prefix + ".outer.bias"));
}

template <typename T>
Memory<T> Transformer<T>::encode(const TokenMatrix& tokens, const ForwardOptions& options) const {
  if (config_.variant == Variant::kLanguageModel) throw ContractError("language-model variant has no encoder");
  Tensor<T> x = embed("encoder.embedding", tokens, options);
  const Tensor<T> bias = attention_bias<T>(tokens.batch, tokens.length, tokens.length, tokens.valid, false);
  for (std::size_t i = 0; i < config_.num_blocks; ++i) {
    const std::string b = block_name("encoder", i);
    x = norm(b + ".norm1", add(x, maybe_dropout(attention(b + ".self_attn", x, x, bias), options)));
    x = norm(b + ".norm2", add(x, maybe_dropout(feed_forward(b + ".ffn", x), options)));
  }
  return Memory<T>{x, tokens.valid, tokens.batch, tokens.length};
}

template <typename T>
Tensor<T> Transformer<T>::cross_attention(std::size_t block, const Tensor<T>& query, const Memory<T>& memory) const {
  if (memory.states.shape().back() != config_.model_dim || query.shape().back() != config_.model_dim) {
    throw DimensionError("cross attention: feature dims " + shape_to_string(query.shape()) + " vs " +
                         shape_to_string(memory.states.shape()));
  }
  const std::size_t tq = query.dim(1);
  const Tensor<T> bias = attention_bias<T>(memory.batch, tq, memory.length, memory.valid, false);
  return attention(block_name("decoder", block) + ".cross_attn", query, memory.states, bias);
}

template <typename T>
DualContext<T> Transformer<T>::dual_context_attention(std::size_t block, const Tensor<T>& query,
                                                      const Memory<T>& history, const Memory<T>& future) const {
  if (config_.variant != Variant::kScenario) throw ContractError("dual-context attention needs the scenario variant");
  DualContext<T> out;
  out.history_context = cross_attention(block, query, history);
  out.future_context = cross_attention(block, query, future);
  out.concatenated = concat(std::vector<Tensor<T>>{out.history_context, out.future_context}, 2);
  const std::string m = block_name("decoder", block) + ".merge";
  out.merged = affine(out.concatenated, params_.at(m + ".weight"), params_.at(m + ".bias"));
  return out;
}

template <typename T>
DecodeOutput<T> Transformer<T>::decode(const TokenMatrix& target_input, const Memory<T>* history,
                                       const Memory<T>* future, const ForwardOptions& options) const {
  const Variant v = config_.variant;
  if (v == Variant::kConventional && future != nullptr) {
    throw ContractError("future memory supplied to the conventional (history-only) variant");
  }
  if (v == Variant::kScenario && (future == nullptr || history == nullptr)) {
    throw ContractError("scenario variant needs both history and future memories");
  }
  if (v == Variant::kConventional && history == nullptr) throw ContractError("conventional variant needs history");
  if (v == Variant::kLanguageModel && (history != nullptr || future != nullptr)) {
    throw ContractError("language-model variant takes no encoder memory");
  }
  for (const Memory<T>* m : {history, future}) {
    if (m != nullptr && m->batch != target_input.batch) {
      throw ContractError("memory batch " + std::to_string(m->batch) + " != target batch " +
                          std::to_string(target_input.batch));
    }
  }

  Tensor<T> x = embed("decoder.embedding", target_input, options);
  const Tensor<T> causal =
      attention_bias<T>(target_input.batch, target_input.length, target_input.length, target_input.valid, true);
  DecodeOutput<T> out;
  for (std::size_t i = 0; i < config_.num_blocks; ++i) {
    const std::string b = block_name("decoder", i);
    x = norm(b + ".norm1", add(x, maybe_dropout(attention(b + ".self_attn", x, x, causal), options)));
    if (v != Variant::kLanguageModel) {
      Tensor<T> context = v == Variant::kScenario ? dual_context_attention(i, x, *history, *future).merged
                                                  : cross_attention(i, x, *history);
      x = norm(b + ".norm2", add(x, maybe_dropout(context, options)));
    }
    x = norm(b + ".norm3", add(x, maybe_dropout(feed_forward(b + ".ffn", x), options)));
    out.hiddens.push_back(x);
  }
  out.logits = affine(x, params_.at("output.weight"), params_.at("output.bias"));
  out.distributions = softmax(out.logits, 2);
  return out;
}

template <typename T>
std::uint64_t parameter_fingerprint(const ParameterSet<T>& params) {
  std::uint64_t h = 14695981039346656037ull;
  auto feed = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& [name, tensor] : params.entries()) {
    feed(name.data(), name.size());
    for (std::size_t d : tensor.shape()) feed(&d, sizeof d);
    feed(tensor.values().data(), tensor.values().size_bytes());
  }
  return h;
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template class Transformer<float>;
template class Transformer<double>;
template ParameterSet<float> init_params<float>(const ModelConfig&, std::uint64_t);
template ParameterSet<double> init_params<double>(const ModelConfig&, std::uint64_t);
template std::uint64_t parameter_fingerprint<float>(const ParameterSet<float>&);
template std::uint64_t parameter_fingerprint<double>(const ParameterSet<double>&);
template Tensor<float> positional_encoding<float>(std::size_t, std::size_t);
template Tensor<double> positional_encoding<double>(std::size_t, std::size_t);

}  // namespace sdkd
