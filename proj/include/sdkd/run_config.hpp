// Copyright 2026 The sdkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration addressed by flat dotted keys such as
// "training.lambda1". Config files are JSON objects of such keys; later
// assignments override earlier ones, and "preset" is applied first.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdkd/corpus.hpp"
#include "sdkd/inference.hpp"
#include "sdkd/model.hpp"
#include "sdkd/trainer.hpp"

namespace sdkd {

struct DataSettings {
  std::string format = "eou";
  WindowShape window;
  bool filter = true;
  std::size_t vocab_size = 20000;
  double valid_fraction = 0.1;
  double test_fraction = 0.1;
  std::size_t max_length = 100;  // token cap per encoded side
};

struct PathSettings {
  std::string corpus;
  std::string data;
  std::string checkpoint;
  std::string teacher;
  std::string lm_teacher;
  std::string embeddings;
  std::string out;
  std::string log;
};

struct AnalysisSettings {
  std::vector<double> sigmas{0.0, 0.01, 0.05, 0.1};
  std::size_t samples = 5;
  std::size_t top_k = 2350;
  std::string strategy = "exact-match";
};

struct RunConfig {
  std::string preset = "desk";
  ModelConfig model = ModelConfig::desk_preset(0, Variant::kConventional);
  TrainingConfig training = TrainingConfig::desk_preset();
  DecodeConfig decode;
  DataSettings data;
  PathSettings paths;
  AnalysisSettings analysis;

  // Throws UsageError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  nlohmann::json to_json() const;
  void validate() const;
};

using Assignment = std::pair<std::string, std::string>;

// Reads a flat JSON object into ordered assignments.
std::vector<Assignment> read_config_file(const std::string& path);

RunConfig build_run_config(const std::vector<Assignment>& assignments);

}  // namespace sdkd
