// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lszone/scene.hpp"

namespace lszone {

// Scale-invariant SDR in dB, capped at 100. Throws on a zero reference.
double si_sdr(const std::vector<double>& estimate, const std::vector<double>& reference);

struct LeakageReport {
  std::vector<double> per_zone_db;  // zone energy relative to total active energy
  double aggregate_db = 0.0;        // 10 log10(inactive energy / active energy)
};

LeakageReport leakage_db(const std::vector<std::vector<double>>& separated,
                         const std::vector<int>& active_zones);

// Externally produced ASR output, one JSON record per (clip, zone):
//   {"clip":"clip_000001","zone":3,"text":"...", "cer":0.12}   (cer optional)
struct TranscriptSet {
  std::map<std::pair<std::string, int>, std::string> text;
  std::map<std::pair<std::string, int>, double> cer;
};

TranscriptSet load_transcripts(const std::string& path);

struct FirReport {
  double fir = 0.0;
  uint64_t numerator = 0;
  uint64_t denominator = 0;
  // keyed by the clip's speaker count P
  std::map<int, std::pair<uint64_t, uint64_t>> by_speaker_count;
  std::optional<double> mean_cer;  // over active zones, when provided
  bool per_clip = false;
};

// Non-empty (after trimming whitespace) transcripts in inactive zones count
// as false intrusions. Default denominator: (clip, inactive zone) pairs;
// per_clip switches to clips-with-any-intrusion over clips-with-inactive-zones.
FirReport compute_fir(const TranscriptSet& transcripts,
                      const std::vector<SceneManifestEntry>& manifest,
                      bool per_clip = false);

}  // namespace lszone
