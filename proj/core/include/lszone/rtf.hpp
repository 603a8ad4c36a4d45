// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <vector>

#include "lszone/model.hpp"
#include "lszone/rng.hpp"

namespace lszone {

struct RtfStats {
  double median = 0.0;
  double best = 0.0;
  double worst = 0.0;
  std::vector<double> runs;
  double audio_seconds = 0.0;
};

// Wall-clock streaming time over audio duration, median across repeats,
// single thread, warm-up runs excluded. Measures the stream_step loop, so
// the timed output equals the offline output by construction.
template <typename T>
RtfStats measure_rtf(const LSZoneModel<T>& model, double duration_s, int repeats,
                     int warmup, uint64_t seed) {
  if (duration_s <= 0.0)
    throw std::invalid_argument("rtf: duration must be positive");
  if (repeats < 1) throw std::invalid_argument("rtf: need at least one repeat");

  const auto& stft_cfg = model.config().stft;
  const int hop = stft_cfg.hop;
  const int zones = model.config().zones;
  const size_t blocks =
      static_cast<size_t>(duration_s * stft_cfg.sample_rate) / hop;
  if (blocks == 0) throw std::invalid_argument("rtf: duration shorter than one hop");

  Rng rng(seed);
  std::vector<std::vector<std::vector<T>>> input(blocks);
  for (auto& blk : input) {
    blk.assign(zones, std::vector<T>(hop));
    for (auto& ch : blk)
      for (auto& s : ch) s = static_cast<T>(rng.uniform(-0.5, 0.5));
  }

  RtfStats stats;
  stats.audio_seconds =
      static_cast<double>(blocks * hop) / stft_cfg.sample_rate;
  std::vector<std::vector<T>> out;
  for (int run = 0; run < warmup + repeats; ++run) {
    auto state = model.stream_init();
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& blk : input) model.stream_step(state, blk, out);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    if (run >= warmup) stats.runs.push_back(secs / stats.audio_seconds);
  }
  auto sorted = stats.runs;
  std::sort(sorted.begin(), sorted.end());
  stats.median = sorted[sorted.size() / 2];
  stats.best = sorted.front();
  stats.worst = sorted.back();
  return stats;
}

}  // namespace lszone
