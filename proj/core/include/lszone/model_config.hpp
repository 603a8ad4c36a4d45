// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

#include "lszone/stft.hpp"

namespace lszone {

// How the gate combines mel and squeezed-IPD features:
//   Convex:  X_s = g .* mel + (1 - g) .* ipd
//   MelOnly: X_s = g .* mel
enum class GateMode { Convex, MelOnly };

inline std::string to_string(GateMode m) {
  return m == GateMode::Convex ? "convex" : "mel-only";
}
inline GateMode gate_mode_from_string(const std::string& s) {
  if (s == "convex") return GateMode::Convex;
  if (s == "mel-only") return GateMode::MelOnly;
  throw std::invalid_argument("unknown gate mode: " + s);
}

struct ModelConfig {
  int zones = 6;
  int n_mel = 64;
  int hidden = 72;         // feature width H between encoder and decoder
  int hidden_units = 144;  // narrowband GRU state width
  int blocks = 6;          // stacked CNP modules

  int encoder_kernel = 5;
  int squeezer_kernel = 5;
  int gate_kernel = 5;
  int crossband_kernel = 5;
  int crossband_groups = 8;

  GateMode gate_mode = GateMode::Convex;
  StftConfig stft;
  double mel_fmin = 0.0;
  double mel_fmax = 8000.0;

  void validate() const {
    stft.validate();
    if (zones < 2) throw std::invalid_argument("model: needs >= 2 zones (IPD)");
    if (n_mel <= 0 || n_mel >= stft.bins())
      throw std::invalid_argument("model: n_mel must be in (0, bins)");
    if (hidden <= 0 || hidden_units <= 0 || blocks < 0)
      throw std::invalid_argument("model: nonpositive width or block count");
    if (hidden % crossband_groups != 0)
      throw std::invalid_argument("model: hidden must divide by crossband groups");
    if (encoder_kernel % 2 == 0 || squeezer_kernel % 2 == 0 ||
        gate_kernel % 2 == 0 || crossband_kernel % 2 == 0)
      throw std::invalid_argument("model: same-padded kernels must be odd");
  }
};

}  // namespace lszone
