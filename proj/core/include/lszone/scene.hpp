// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Cabin scene generation: seat/mic geometry, per-speaker zone images through
// image-method RIRs, SIR/SNR mixing, and the dataset builder.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lszone/room.hpp"

namespace lszone {

// Three rows by two columns of seats with one ceiling microphone per seat.
struct ZoneLayout {
  static constexpr int kZones = 6;
  std::vector<Vec3> seats;
  std::vector<Vec3> mics;
  double position_jitter = 0.05;  // applied to source positions per clip

  static ZoneLayout standard();
};

struct SpeakerSpec {
  int zone = -1;
  uint64_t source_seed = 0;     // synthetic mode
  std::string source_path;      // wav-dir mode
  double sir_db = 0.0;          // relative to speaker 0; ignored for speaker 0
};

struct SceneManifestEntry {
  std::string clip_id;
  std::string split = "train";
  std::vector<int> active_zones;
  std::vector<SpeakerSpec> speakers;  // speakers[0] is the SIR reference
  uint64_t noise_seed = 0;
  Vec3 noise_pos{0, 0, 0};
  double snr_db = 0.0;
  double rt60 = 0.07;
  uint64_t rir_seed = 0;  // drives position jitter and per-path RIR seeds
  std::string mixture_path;
  std::string target_path;
  int num_samples = 0;
  int sample_rate = 16000;
};

std::string manifest_entry_to_json(const SceneManifestEntry& e);
SceneManifestEntry manifest_entry_from_json(const std::string& line);
std::vector<SceneManifestEntry> load_manifest(const std::string& path);

// Reverberant images: each dry source convolved with one RIR per microphone.
struct ZoneImages {
  // [speaker][mic][sample]
  std::vector<std::vector<std::vector<double>>> speakers;
  // [mic][sample]
  std::vector<std::vector<double>> noise;
};

// speaker_positions[i] must sit in speakers[i]'s zone; at most one speaker
// per zone. All sources are truncated to the dry length.
ZoneImages render_zone_images(const std::vector<std::vector<double>>& dry_speakers,
                              const std::vector<int>& speaker_zones,
                              const std::vector<Vec3>& speaker_positions,
                              const std::vector<double>& dry_noise,
                              const Vec3& noise_pos, const ZoneLayout& layout,
                              const RoomSpec& room, uint64_t rir_seed);

struct MixResult {
  std::vector<std::vector<double>> mixture;  // Z channels
  std::vector<std::vector<double>> target;   // Z channels, inactive zones zero
  std::vector<double> speaker_gains;
  double noise_gain = 0.0;
};

// Speaker 0 is the SIR reference; interferer i is scaled so that the
// own-zone image power ratio hits speakers[i].sir_db, then noise is scaled
// so that channel-averaged speech-to-noise power hits snr_db.
MixResult mix_scene(const ZoneImages& images, const SceneManifestEntry& entry);

// AM-modulated pink noise with pauses; stands in for read speech at desk scale.
std::vector<double> synth_speech_like(uint64_t seed, size_t n, int sample_rate);
// steady pink noise bed
std::vector<double> synth_noise(uint64_t seed, size_t n);

struct SimulateOptions {
  int count = 100;
  uint64_t seed = 7;
  std::string out_dir;
  std::string split = "train";
  double clip_seconds = 3.0;
  double rt60_min = 0.05, rt60_max = 0.09;
  double sir_min = -6.0, sir_max = 6.0;
  double snr_min = -10.0, snr_max = 20.0;
  std::string source_mode = "synthetic";  // "synthetic" | "wav-dir"
  std::string wav_dir;
  bool float32 = true;
  int threads = 0;  // 0 = hardware concurrency
  int sample_rate = 16000;
};

// Writes <out>/<clip>_mix.wav, <out>/<clip>_target.wav and manifest.jsonl.
// Every clip derives all randomness from (seed, split, index), so parallel
// and serial builds produce identical bytes.
std::vector<SceneManifestEntry> build_dataset(const SimulateOptions& opts);

}  // namespace lszone
