// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "sdkd/errors.hpp"

namespace sdkd {

namespace {

constexpr char kMagic[] = "SDKD1";
constexpr std::size_t kMagicSize = 5;

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config field '") + key + "': " + e.what());
  }
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

}  // namespace

nlohmann::json to_json(const ModelConfig& c) {
  return {{"vocab_size", c.vocab_size},
          {"model_dim", c.model_dim},
          {"num_blocks", c.num_blocks},
          {"num_heads", c.num_heads},
          {"ffn_dim", c.ffn_dim},
          {"dropout_rate", c.dropout_rate},
          {"max_sequence_length", c.max_sequence_length},
          {"variant", to_string(c.variant)},
          {"init_std", c.init_std},
          {"layer_norm_epsilon", c.layer_norm_epsilon}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("model config must be a JSON object");
  ModelConfig c;
  c.vocab_size = get_or(j, "vocab_size", c.vocab_size);
  c.model_dim = get_or(j, "model_dim", c.model_dim);
  c.num_blocks = get_or(j, "num_blocks", c.num_blocks);
  c.num_heads = get_or(j, "num_heads", c.num_heads);
  c.ffn_dim = get_or(j, "ffn_dim", c.ffn_dim);
  c.dropout_rate = get_or(j, "dropout_rate", c.dropout_rate);
  c.max_sequence_length = get_or(j, "max_sequence_length", c.max_sequence_length);
  c.variant = variant_from_string(get_or(j, "variant", to_string(c.variant)));
  c.init_std = get_or(j, "init_std", c.init_std);
  c.layer_norm_epsilon = get_or(j, "layer_norm_epsilon", c.layer_norm_epsilon);
  return c;
}

nlohmann::json to_json(const TrainingConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"grad_clip_norm", c.grad_clip_norm},
          {"batch_size", c.batch_size},
          {"alpha", c.alpha},
          {"lambda1", c.lambda1},
          {"lambda_lm", c.lambda_lm},
          {"temperature", c.temperature},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"hard_transfer_scope", to_string(c.hard_transfer_scope)},
          {"max_steps", c.max_steps},
          {"eval_interval", c.eval_interval}};
}

TrainingConfig training_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("training config must be a JSON object");
  TrainingConfig c;
  c.learning_rate = get_or(j, "learning_rate", c.learning_rate);
  c.grad_clip_norm = get_or(j, "grad_clip_norm", c.grad_clip_norm);
  c.batch_size = get_or(j, "batch_size", c.batch_size);
  c.alpha = get_or(j, "alpha", c.alpha);
  c.lambda1 = get_or(j, "lambda1", c.lambda1);
  c.lambda_lm = get_or(j, "lambda_lm", c.lambda_lm);
  c.temperature = get_or(j, "temperature", c.temperature);
  c.epochs = get_or(j, "epochs", c.epochs);
  c.seed = get_or(j, "seed", c.seed);
  c.hard_transfer_scope = hard_transfer_from_string(get_or(j, "hard_transfer_scope", to_string(c.hard_transfer_scope)));
  c.max_steps = get_or(j, "max_steps", c.max_steps);
  c.eval_interval = get_or(j, "eval_interval", c.eval_interval);
  return c;
}

nlohmann::json to_json(const DecodeConfig& c) {
  return {{"strategy", to_string(c.strategy)},
          {"beam_width", c.beam_width},
          {"max_length", c.max_length},
          {"length_penalty", c.length_penalty}};
}

DecodeConfig decode_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("decode config must be a JSON object");
  DecodeConfig c;
  c.strategy = decode_strategy_from_string(get_or(j, "strategy", to_string(c.strategy)));
  c.beam_width = get_or(j, "beam_width", c.beam_width);
  c.max_length = get_or(j, "max_length", c.max_length);
  c.length_penalty = get_or(j, "length_penalty", c.length_penalty);
  return c;
}

std::string serialize_checkpoint(const Checkpoint& ck) {
  nlohmann::json header;
  header["model_config"] = to_json(ck.model);
  if (ck.training) header["training_config"] = to_json(*ck.training);
  header["vocabulary"] = ck.vocabulary;
  header["metadata"] = ck.metadata;
  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& [name, tensor] : ck.params.entries()) manifest.push_back({{"name", name}, {"shape", tensor.shape()}});
  header["tensors"] = manifest;
  const std::string text = header.dump();

  std::string out(kMagic, kMagicSize);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (const auto& [name, tensor] : ck.params.entries()) {
    for (float v : tensor.values()) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      put_u32(out, bits);
    }
  }
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  if (bytes.size() < kMagicSize + 4 || bytes.compare(0, kMagicSize, kMagic) != 0) {
    throw FormatError("not an SDKD1 checkpoint (bad magic)");
  }
  const std::size_t header_len = get_u32(bytes, kMagicSize);
  const std::size_t payload_at = kMagicSize + 4 + header_len;
  if (payload_at > bytes.size()) throw FormatError("checkpoint header truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + kMagicSize + 4, bytes.begin() + static_cast<std::ptrdiff_t>(payload_at));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || !header.contains("model_config") || !header.contains("tensors")) {
    throw FormatError("checkpoint header lacks model_config or tensors");
  }
  Checkpoint ck;
  ck.model = model_config_from_json(header["model_config"]);
  if (header.contains("training_config")) ck.training = training_config_from_json(header["training_config"]);
  ck.vocabulary = header.value("vocabulary", std::vector<std::string>{});
  ck.metadata = header.value("metadata", nlohmann::json::object());

  std::size_t expected = 0;
  std::vector<std::pair<std::string, Shape>> manifest;
  try {
    for (const auto& entry : header["tensors"]) {
      manifest.emplace_back(entry.at("name").get<std::string>(), entry.at("shape").get<Shape>());
      expected += shape_numel(manifest.back().second);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint manifest malformed: ") + e.what());
  }
  const std::size_t payload = bytes.size() - payload_at;
  if (payload != expected * 4) {
    throw FormatError("checkpoint payload holds " + std::to_string(payload) + " bytes, manifest needs " +
                      std::to_string(expected * 4));
  }
  std::size_t at = payload_at;
  for (auto& [name, shape] : manifest) {
    std::vector<float> values(shape_numel(shape));
    for (auto& v : values) {
      const std::uint32_t bits = get_u32(bytes, at);
      std::memcpy(&v, &bits, sizeof v);
      at += 4;
    }
    ck.params.add(name, Tensor<float>(shape, std::move(values)));
  }

  ck.model.validate();
  const auto reference = init_params<float>(ck.model, 0);
  if (reference.size() != ck.params.size()) {
    throw FormatError("checkpoint holds " + std::to_string(ck.params.size()) + " tensors, a " +
                      to_string(ck.model.variant) + " model has " + std::to_string(reference.size()));
  }
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const auto& [want_name, want] = reference.entries()[i];
    const auto& [got_name, got] = ck.params.entries()[i];
    if (want_name != got_name || want.shape() != got.shape()) {
      throw FormatError("checkpoint tensor " + std::to_string(i) + " is '" + got_name + "' " +
                        shape_to_string(got.shape()) + ", expected '" + want_name + "' " + shape_to_string(want.shape()));
    }
  }
  if (!ck.vocabulary.empty() && ck.vocabulary.size() != ck.model.vocab_size) {
    throw FormatError("checkpoint vocabulary has " + std::to_string(ck.vocabulary.size()) + " entries, model expects " +
                      std::to_string(ck.model.vocab_size));
  }
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_checkpoint(buffer.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::uint64_t file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::uint64_t h = 14695981039346656037ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace sdkd
