// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint file layout:
//   "SDKD1"            5 bytes
//   header length      uint32, little-endian
//   header             UTF-8 JSON: configs, vocabulary, tensor manifest
//   payload            float32 little-endian values in manifest order

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdkd/inference.hpp"
#include "sdkd/model.hpp"
#include "sdkd/trainer.hpp"
#include "sdkd/vocabulary.hpp"

namespace sdkd {

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainingConfig& config);
TrainingConfig training_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DecodeConfig& config);
DecodeConfig decode_config_from_json(const nlohmann::json& j);

struct Checkpoint {
  ModelConfig model;
  std::optional<TrainingConfig> training;
  ParameterSet<float> params;
  std::vector<std::string> vocabulary;  // id order; empty when unknown
  nlohmann::json metadata = nlohmann::json::object();

  Transformer<float> transformer() const { return Transformer<float>(model, params.clone()); }
};

// Throws IoError naming the path on any write failure.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);

// Throws FormatError on bad magic, malformed header, manifest/payload size
// disagreement, or a manifest that does not match the configured variant.
Checkpoint load_checkpoint(const std::string& path);

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::string& bytes);

// FNV-1a of the file bytes.
std::uint64_t file_fingerprint(const std::string& path);

}  // namespace sdkd
