// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lszone/model_config.hpp"

namespace lszone {

// Analytic multiply-accumulate counts per second of audio (frame rate =
// sample_rate / hop). Elementwise ops, activations and normalizations are
// excluded; see docs/macs.md for the closed-form derivation.
struct MacsReport {
  struct Item {
    std::string name;
    uint64_t per_second = 0;
  };
  std::vector<Item> layers;
  std::vector<Item> subtotals;  // spaiec, encoder, cnp.<i>..., decoder
  uint64_t total = 0;
  uint64_t param_count = 0;
  double frames_per_second = 0.0;

  std::string to_text() const;
};

MacsReport report_macs(const ModelConfig& cfg);

// closed-form parameter count for the same configuration
uint64_t analytic_param_count(const ModelConfig& cfg);

}  // namespace lszone
