// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

namespace lszone {

struct WavData {
  int sample_rate = 0;
  // samples[channel][n], float range [-1, 1) for PCM16 sources
  std::vector<std::vector<double>> samples;
};

// Reads RIFF WAV, PCM16 or IEEE float32. Rejects sample rates other than
// `expect_rate` when expect_rate > 0. Malformed input reports the byte offset.
WavData read_wav(const std::string& path, int expect_rate = 16000);

// float32 by default (lossless round trip); PCM16 scales by 32768 and clamps.
void write_wav(const std::string& path, const std::vector<std::vector<double>>& samples,
               int sample_rate, bool float32 = true);

}  // namespace lszone
