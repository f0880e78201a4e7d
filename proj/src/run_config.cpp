// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdkd/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sdkd/checkpoint.hpp"
#include "sdkd/errors.hpp"

namespace sdkd {

namespace {

std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) throw UsageError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw UsageError(key + ": expected a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw UsageError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw UsageError(key + ": empty list");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto sz = [&t](const char* k, std::function<std::size_t&(RunConfig&)> ref) {
      t[k] = [ref](RunConfig& c, const std::string& key, const std::string& v) { ref(c) = parse_size(key, v); };
    };
    auto dbl = [&t](const char* k, std::function<double&(RunConfig&)> ref) {
      t[k] = [ref](RunConfig& c, const std::string& key, const std::string& v) { ref(c) = parse_double(key, v); };
    };
    auto str = [&t](const char* k, std::function<std::string&(RunConfig&)> ref) {
      t[k] = [ref](RunConfig& c, const std::string&, const std::string& v) { ref(c) = v; };
    };

    t["seed"] = [](RunConfig& c, const std::string& key, const std::string& v) { c.training.seed = parse_size(key, v); };
    sz("model.model_dim", [](RunConfig& c) -> std::size_t& { return c.model.model_dim; });
    sz("model.num_blocks", [](RunConfig& c) -> std::size_t& { return c.model.num_blocks; });
    sz("model.num_heads", [](RunConfig& c) -> std::size_t& { return c.model.num_heads; });
    sz("model.ffn_dim", [](RunConfig& c) -> std::size_t& { return c.model.ffn_dim; });
    sz("model.max_sequence_length", [](RunConfig& c) -> std::size_t& { return c.model.max_sequence_length; });
    dbl("model.dropout_rate", [](RunConfig& c) -> double& { return c.model.dropout_rate; });
    dbl("model.init_std", [](RunConfig& c) -> double& { return c.model.init_std; });
    dbl("model.layer_norm_epsilon", [](RunConfig& c) -> double& { return c.model.layer_norm_epsilon; });

    dbl("training.learning_rate", [](RunConfig& c) -> double& { return c.training.learning_rate; });
    dbl("training.grad_clip_norm", [](RunConfig& c) -> double& { return c.training.grad_clip_norm; });
    sz("training.batch_size", [](RunConfig& c) -> std::size_t& { return c.training.batch_size; });
    dbl("training.alpha", [](RunConfig& c) -> double& { return c.training.alpha; });
    dbl("training.lambda1", [](RunConfig& c) -> double& { return c.training.lambda1; });
    dbl("training.lambda_lm", [](RunConfig& c) -> double& { return c.training.lambda_lm; });
    dbl("training.temperature", [](RunConfig& c) -> double& { return c.training.temperature; });
    sz("training.epochs", [](RunConfig& c) -> std::size_t& { return c.training.epochs; });
    sz("training.max_steps", [](RunConfig& c) -> std::size_t& { return c.training.max_steps; });
    sz("training.eval_interval", [](RunConfig& c) -> std::size_t& { return c.training.eval_interval; });
    t["training.hard_transfer_scope"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.training.hard_transfer_scope = hard_transfer_from_string(v);
    };

    t["decode.strategy"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.decode.strategy = decode_strategy_from_string(v);
    };
    sz("decode.beam_width", [](RunConfig& c) -> std::size_t& { return c.decode.beam_width; });
    sz("decode.max_length", [](RunConfig& c) -> std::size_t& { return c.decode.max_length; });
    dbl("decode.length_penalty", [](RunConfig& c) -> double& { return c.decode.length_penalty; });

    t["data.format"] = [](RunConfig& c, const std::string&, const std::string& v) {
      corpus_format_from_string(v);
      c.data.format = v;
    };
    sz("data.history_turns", [](RunConfig& c) -> std::size_t& { return c.data.window.history_turns; });
    sz("data.response_turns", [](RunConfig& c) -> std::size_t& { return c.data.window.response_turns; });
    sz("data.future_turns", [](RunConfig& c) -> std::size_t& { return c.data.window.future_turns; });
    sz("data.stride", [](RunConfig& c) -> std::size_t& { return c.data.window.stride; });
    t["data.filter"] = [](RunConfig& c, const std::string& key, const std::string& v) { c.data.filter = parse_bool(key, v); };
    sz("data.vocab_size", [](RunConfig& c) -> std::size_t& { return c.data.vocab_size; });
    dbl("data.valid_fraction", [](RunConfig& c) -> double& { return c.data.valid_fraction; });
    dbl("data.test_fraction", [](RunConfig& c) -> double& { return c.data.test_fraction; });
    sz("data.max_length", [](RunConfig& c) -> std::size_t& { return c.data.max_length; });

    str("paths.corpus", [](RunConfig& c) -> std::string& { return c.paths.corpus; });
    str("paths.data", [](RunConfig& c) -> std::string& { return c.paths.data; });
    str("paths.checkpoint", [](RunConfig& c) -> std::string& { return c.paths.checkpoint; });
    str("paths.teacher", [](RunConfig& c) -> std::string& { return c.paths.teacher; });
    str("paths.lm_teacher", [](RunConfig& c) -> std::string& { return c.paths.lm_teacher; });
    str("paths.embeddings", [](RunConfig& c) -> std::string& { return c.paths.embeddings; });
    str("paths.out", [](RunConfig& c) -> std::string& { return c.paths.out; });
    str("paths.log", [](RunConfig& c) -> std::string& { return c.paths.log; });

    t["analysis.sigmas"] = [](RunConfig& c, const std::string& key, const std::string& v) {
      c.analysis.sigmas = parse_list(key, v);
    };
    sz("analysis.samples", [](RunConfig& c) -> std::size_t& { return c.analysis.samples; });
    sz("analysis.top_k", [](RunConfig& c) -> std::size_t& { return c.analysis.top_k; });
    t["analysis.strategy"] = [](RunConfig& c, const std::string&, const std::string& v) { c.analysis.strategy = v; };
    return t;
  }();
  return table;
}

void apply_preset(RunConfig& c, const std::string& name) {
  if (name == "paper") {
    c.model = ModelConfig::paper_preset(0, Variant::kConventional);
    c.training = TrainingConfig();
  } else if (name == "desk") {
    c.model = ModelConfig::desk_preset(0, Variant::kConventional);
    c.training = TrainingConfig::desk_preset();
  } else {
    throw UsageError("unknown preset '" + name + "' (paper | desk)");
  }
  c.preset = name;
}

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& x : v) out += (out.empty() ? "" : ",") + scalar_text(x);
    return out;
  }
  return v.dump();
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "preset") {
    apply_preset(*this, value);
    return;
  }
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw UsageError("unknown configuration key '" + key + "'");
  it->second(*this, key, value);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["preset"] = preset;
  j["seed"] = training.seed;
  const nlohmann::json m = sdkd::to_json(model), t = sdkd::to_json(training), d = sdkd::to_json(decode);
  for (auto it = m.begin(); it != m.end(); ++it) {
    if (it.key() != "vocab_size" && it.key() != "variant") j["model." + it.key()] = it.value();
  }
  for (auto it = t.begin(); it != t.end(); ++it) {
    if (it.key() != "seed") j["training." + it.key()] = it.value();
  }
  for (auto it = d.begin(); it != d.end(); ++it) j["decode." + it.key()] = it.value();
  j["data.format"] = data.format;
  j["data.history_turns"] = data.window.history_turns;
  j["data.response_turns"] = data.window.response_turns;
  j["data.future_turns"] = data.window.future_turns;
  j["data.stride"] = data.window.stride;
  j["data.filter"] = data.filter;
  j["data.vocab_size"] = data.vocab_size;
  j["data.valid_fraction"] = data.valid_fraction;
  j["data.test_fraction"] = data.test_fraction;
  j["data.max_length"] = data.max_length;
  j["paths.corpus"] = paths.corpus;
  j["paths.data"] = paths.data;
  j["paths.checkpoint"] = paths.checkpoint;
  j["paths.teacher"] = paths.teacher;
  j["paths.lm_teacher"] = paths.lm_teacher;
  j["paths.embeddings"] = paths.embeddings;
  j["paths.out"] = paths.out;
  j["paths.log"] = paths.log;
  j["analysis.sigmas"] = analysis.sigmas;
  j["analysis.samples"] = analysis.samples;
  j["analysis.top_k"] = analysis.top_k;
  j["analysis.strategy"] = analysis.strategy;
  return j;
}

void RunConfig::validate() const {
  training.validate();
  decode.validate();
  if (model.model_dim == 0 || model.num_heads == 0 || model.model_dim % model.num_heads != 0) {
    throw UsageError("model.model_dim must be a positive multiple of model.num_heads");
  }
  if (model.num_blocks == 0 || model.ffn_dim == 0) throw UsageError("model.num_blocks and model.ffn_dim must be positive");
  if (model.dropout_rate < 0 || model.dropout_rate >= 1) throw UsageError("model.dropout_rate must be in [0, 1)");
  if (data.valid_fraction < 0 || data.test_fraction < 0 || data.valid_fraction + data.test_fraction >= 1) {
    throw UsageError("data.valid_fraction + data.test_fraction must be below 1");
  }
  if (data.max_length < 2) throw UsageError("data.max_length must be at least 2");
  if (data.max_length > model.max_sequence_length) {
    throw UsageError("data.max_length exceeds model.max_sequence_length");
  }
  if (data.vocab_size < 5) throw UsageError("data.vocab_size must exceed the 4 reserved tokens");
  if (analysis.samples == 0) throw UsageError("analysis.samples must be positive");
}

std::vector<Assignment> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  if (!j.is_object()) throw FormatError(path + ": config must be a flat JSON object");
  std::vector<Assignment> out;
  for (const auto& [k, v] : j.items()) {
    if (v.is_object()) throw FormatError(path + ": key '" + k + "' is nested; use dotted keys");
    out.emplace_back(k, scalar_text(v));
  }
  return out;
}

RunConfig build_run_config(const std::vector<Assignment>& assignments) {
  RunConfig c;
  for (const auto& [k, v] : assignments)
    if (k == "preset") c.set(k, v);
  for (const auto& [k, v] : assignments)
    if (k != "preset") c.set(k, v);
  return c;
}

}  // namespace sdkd
