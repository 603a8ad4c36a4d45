// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>

#include "lszone/model_config.hpp"
#include "lszone/scene.hpp"
#include "lszone/train.hpp"

namespace lszone {

// One JSON file with sections {stft, model, train, simulate, bench}. Unknown
// keys are rejected; parse -> emit -> parse is the identity.
struct CliConfig {
  ModelConfig model;        // carries the stft section
  uint64_t model_seed = 42;
  TrainConfig train;
  SimulateOptions simulate;
  struct Bench {
    double duration_seconds = 10.0;
    int repeats = 5;
    int warmup = 1;
  } bench;

  static CliConfig from_json_text(const std::string& text);
  static CliConfig from_file(const std::string& path);
  std::string to_json_text() const;
};

}  // namespace lszone
