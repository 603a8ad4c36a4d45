// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lszone/scene.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "lszone/rng.hpp"
#include "lszone/wav.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace lszone {

ZoneLayout ZoneLayout::standard() {
  ZoneLayout l;
  // rows along the cabin length (y), columns across the width (x)
  const double xs[2] = {0.40, 1.05};
  const double ys[3] = {0.55, 1.35, 2.15};
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 2; ++col) {
      l.seats.push_back({xs[col], ys[row], 0.90});
      l.mics.push_back({xs[col], ys[row], 1.15});
    }
  return l;
}

// ------------------------------------------------------------- manifest io

std::string manifest_entry_to_json(const SceneManifestEntry& e) {
  json j;
  j["clip_id"] = e.clip_id;
  j["split"] = e.split;
  j["active_zones"] = e.active_zones;
  json speakers = json::array();
  for (const auto& s : e.speakers) {
    json sp;
    sp["zone"] = s.zone;
    sp["source_seed"] = s.source_seed;
    if (!s.source_path.empty()) sp["source_path"] = s.source_path;
    sp["sir_db"] = s.sir_db;
    speakers.push_back(sp);
  }
  j["speakers"] = speakers;
  j["noise_seed"] = e.noise_seed;
  j["noise_pos"] = {e.noise_pos[0], e.noise_pos[1], e.noise_pos[2]};
  j["snr_db"] = e.snr_db;
  j["rt60"] = e.rt60;
  j["rir_seed"] = e.rir_seed;
  j["mixture_path"] = e.mixture_path;
  j["target_path"] = e.target_path;
  j["num_samples"] = e.num_samples;
  j["sample_rate"] = e.sample_rate;
  return j.dump();
}

SceneManifestEntry manifest_entry_from_json(const std::string& line) {
  const json j = json::parse(line);
  SceneManifestEntry e;
  e.clip_id = j.at("clip_id").get<std::string>();
  e.split = j.at("split").get<std::string>();
  e.active_zones = j.at("active_zones").get<std::vector<int>>();
  for (const auto& sp : j.at("speakers")) {
    SpeakerSpec s;
    s.zone = sp.at("zone").get<int>();
    s.source_seed = sp.at("source_seed").get<uint64_t>();
    if (sp.contains("source_path")) s.source_path = sp.at("source_path").get<std::string>();
    s.sir_db = sp.at("sir_db").get<double>();
    e.speakers.push_back(std::move(s));
  }
  e.noise_seed = j.at("noise_seed").get<uint64_t>();
  const auto& np = j.at("noise_pos");
  e.noise_pos = {np.at(0).get<double>(), np.at(1).get<double>(), np.at(2).get<double>()};
  e.snr_db = j.at("snr_db").get<double>();
  e.rt60 = j.at("rt60").get<double>();
  e.rir_seed = j.at("rir_seed").get<uint64_t>();
  e.mixture_path = j.at("mixture_path").get<std::string>();
  e.target_path = j.at("target_path").get<std::string>();
  e.num_samples = j.at("num_samples").get<int>();
  e.sample_rate = j.at("sample_rate").get<int>();
  return e;
}

std::vector<SceneManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path);
  std::vector<SceneManifestEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(manifest_entry_from_json(line));
  }
  return out;
}

// -------------------------------------------------------------- rendering

namespace {

// direct convolution in axpy form, truncated to the dry length
std::vector<double> convolve_truncated(const std::vector<double>& x,
                                       const std::vector<double>& h) {
  std::vector<double> y(x.size(), 0.0);
  const size_t n = x.size();
  for (size_t j = 0; j < h.size(); ++j) {
    const double hj = h[j];
    if (hj == 0.0) continue;
    for (size_t i = j; i < n; ++i) y[i] += hj * x[i - j];
  }
  return y;
}

double mean_power(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

double mean_power_channels(const std::vector<std::vector<double>>& x) {
  double acc = 0.0;
  for (const auto& ch : x) acc += mean_power(ch);
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

}  // namespace

ZoneImages render_zone_images(const std::vector<std::vector<double>>& dry_speakers,
                              const std::vector<int>& speaker_zones,
                              const std::vector<Vec3>& speaker_positions,
                              const std::vector<double>& dry_noise,
                              const Vec3& noise_pos, const ZoneLayout& layout,
                              const RoomSpec& room, uint64_t rir_seed) {
  if (dry_speakers.size() != speaker_zones.size() ||
      dry_speakers.size() != speaker_positions.size())
    throw std::invalid_argument("render: speaker list sizes disagree");
  std::vector<bool> taken(layout.mics.size(), false);
  for (int z : speaker_zones) {
    if (z < 0 || z >= static_cast<int>(layout.mics.size()))
      throw std::invalid_argument("render: zone index out of range");
    if (taken[z]) throw std::invalid_argument("render: two speakers in one zone");
    taken[z] = true;
  }

  ZoneImages images;
  const int zones = static_cast<int>(layout.mics.size());
  for (size_t i = 0; i < dry_speakers.size(); ++i) {
    std::vector<std::vector<double>> chans(zones);
    for (int m = 0; m < zones; ++m) {
      const uint64_t seed = derive_seed(rir_seed, 1000 + i * 64 + m);
      auto rir = generate_rir(room, speaker_positions[i], layout.mics[m], seed);
      chans[m] = convolve_truncated(dry_speakers[i], rir);
    }
    images.speakers.push_back(std::move(chans));
  }
  images.noise.resize(zones);
  for (int m = 0; m < zones; ++m) {
    const uint64_t seed = derive_seed(rir_seed, 5000 + m);
    auto rir = generate_rir(room, noise_pos, layout.mics[m], seed);
    images.noise[m] = convolve_truncated(dry_noise, rir);
  }
  return images;
}

MixResult mix_scene(const ZoneImages& images, const SceneManifestEntry& entry) {
  const size_t n_speakers = images.speakers.size();
  if (n_speakers != entry.speakers.size() || n_speakers == 0)
    throw std::invalid_argument("mix: speaker count mismatch");
  const int zones = static_cast<int>(images.noise.size());
  const size_t n = images.noise.empty() ? 0 : images.noise[0].size();

  // own-zone reverberant powers define the SIR reference
  std::vector<double> own_power(n_speakers);
  for (size_t i = 0; i < n_speakers; ++i) {
    own_power[i] = mean_power(images.speakers[i][entry.speakers[i].zone]);
    if (own_power[i] <= 0.0) throw std::invalid_argument("silent source");
  }

  MixResult out;
  out.speaker_gains.assign(n_speakers, 1.0);
  for (size_t i = 1; i < n_speakers; ++i)
    out.speaker_gains[i] = std::sqrt(
        own_power[0] / (own_power[i] * std::pow(10.0, entry.speakers[i].sir_db / 10.0)));

  // scaled speech sum
  std::vector<std::vector<double>> speech(zones, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n_speakers; ++i)
    for (int m = 0; m < zones; ++m) {
      const double g = out.speaker_gains[i];
      const auto& src = images.speakers[i][m];
      auto& dst = speech[m];
      for (size_t k = 0; k < n; ++k) dst[k] += g * src[k];
    }

  const double speech_power = mean_power_channels(speech);
  const double noise_power = mean_power_channels(images.noise);
  if (noise_power <= 0.0) throw std::invalid_argument("silent source");
  out.noise_gain =
      std::sqrt(speech_power / (noise_power * std::pow(10.0, entry.snr_db / 10.0)));

  out.mixture.assign(zones, std::vector<double>(n, 0.0));
  for (int m = 0; m < zones; ++m)
    for (size_t k = 0; k < n; ++k)
      out.mixture[m][k] = speech[m][k] + out.noise_gain * images.noise[m][k];

  // target: own-zone scaled image per active zone, silence elsewhere
  out.target.assign(zones, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n_speakers; ++i) {
    const int z = entry.speakers[i].zone;
    const double g = out.speaker_gains[i];
    const auto& src = images.speakers[i][z];
    for (size_t k = 0; k < n; ++k) out.target[z][k] = g * src[k];
  }
  return out;
}

// ------------------------------------------------------------ dry sources

namespace {

// Paul Kellet's economy pink filter over white noise
struct PinkNoise {
  explicit PinkNoise(uint64_t seed) : rng(seed) {}
  double next() {
    const double w = rng.uniform(-1.0, 1.0);
    b0 = 0.99765 * b0 + w * 0.0990460;
    b1 = 0.96300 * b1 + w * 0.2965164;
    b2 = 0.57000 * b2 + w * 1.0526913;
    return b0 + b1 + b2 + w * 0.1848;
  }
  Rng rng;
  double b0 = 0, b1 = 0, b2 = 0;
};

void normalize_rms(std::vector<double>& x, double target_rms) {
  double p = 0.0;
  for (double v : x) p += v * v;
  p = std::sqrt(p / std::max<size_t>(x.size(), 1));
  if (p > 0.0)
    for (double& v : x) v *= target_rms / p;
}

}  // namespace

std::vector<double> synth_speech_like(uint64_t seed, size_t n, int sample_rate) {
  Rng rng(derive_seed(seed, 0xDEED));
  PinkNoise pink(derive_seed(seed, 0xF00D));
  std::vector<double> x(n, 0.0);

  const double ramp_s = 0.010;
  const size_t ramp = static_cast<size_t>(ramp_s * sample_rate);
  size_t pos = 0;
  bool voiced = rng.next_double() < 0.8;  // usually start talking
  while (pos < n) {
    const double dur_s = voiced ? rng.uniform(0.15, 0.45) : rng.uniform(0.05, 0.25);
    size_t dur = static_cast<size_t>(dur_s * sample_rate);
    dur = std::min(dur, n - pos);
    if (voiced) {
      const double am_rate = rng.uniform(2.0, 8.0);
      const double am_phase = rng.uniform(0.0, 2.0 * M_PI);
      for (size_t i = 0; i < dur; ++i) {
        double env = 0.6 + 0.4 * std::sin(2.0 * M_PI * am_rate *
                                              (static_cast<double>(i) / sample_rate) +
                                          am_phase);
        if (i < ramp) env *= static_cast<double>(i) / ramp;
        if (dur - i <= ramp) env *= static_cast<double>(dur - i) / ramp;
        x[pos + i] = env * pink.next();
      }
    } else {
      for (size_t i = 0; i < dur; ++i) pink.next();  // keep streams aligned
    }
    pos += dur;
    voiced = !voiced;
  }
  normalize_rms(x, 0.1);
  return x;
}

std::vector<double> synth_noise(uint64_t seed, size_t n) {
  PinkNoise pink(derive_seed(seed, 0xB00F));
  std::vector<double> x(n);
  for (auto& v : x) v = pink.next();
  normalize_rms(x, 0.1);
  return x;
}

// ---------------------------------------------------------------- builder

namespace {

struct ClipOutput {
  SceneManifestEntry entry;
  std::vector<std::vector<double>> mixture, target;
};

ClipOutput build_clip(const SimulateOptions& opts, const ZoneLayout& layout,
                      const std::vector<std::string>& wav_pool, int index) {
  const uint64_t split_seed = derive_seed(opts.seed, hash_str(opts.split.c_str()));
  const uint64_t clip_seed = derive_seed(split_seed, static_cast<uint64_t>(index));
  Rng rng(clip_seed);

  SceneManifestEntry e;
  char idbuf[32];
  std::snprintf(idbuf, sizeof(idbuf), "clip_%06d", index);
  e.clip_id = idbuf;
  e.split = opts.split;
  e.sample_rate = opts.sample_rate;
  const size_t n = static_cast<size_t>(opts.clip_seconds * opts.sample_rate);
  e.num_samples = static_cast<int>(n);
  e.rt60 = rng.uniform(opts.rt60_min, opts.rt60_max);
  e.rir_seed = rng.next_u64();
  e.noise_seed = rng.next_u64();
  e.snr_db = rng.uniform(opts.snr_min, opts.snr_max);

  // choose P active zones
  const int zones = ZoneLayout::kZones;
  const int P = 1 + static_cast<int>(rng.next_below(zones));
  std::vector<int> order(zones);
  for (int i = 0; i < zones; ++i) order[i] = i;
  for (int i = zones - 1; i > 0; --i)
    std::swap(order[i], order[static_cast<int>(rng.next_below(i + 1))]);
  e.active_zones.assign(order.begin(), order.begin() + P);
  std::sort(e.active_zones.begin(), e.active_zones.end());

  for (int i = 0; i < P; ++i) {
    SpeakerSpec s;
    s.zone = order[i];
    s.source_seed = rng.next_u64();
    if (opts.source_mode == "wav-dir") {
      if (wav_pool.empty()) throw std::runtime_error("wav-dir mode: no wav files found");
      s.source_path = wav_pool[rng.next_below(wav_pool.size())];
    }
    s.sir_db = i == 0 ? 0.0 : rng.uniform(opts.sir_min, opts.sir_max);
    e.speakers.push_back(std::move(s));
  }

  RoomSpec room;
  room.rt60 = e.rt60;
  room.sample_rate = opts.sample_rate;

  // noise position anywhere in the cabin interior
  const double margin = 0.10;
  e.noise_pos = {rng.uniform(margin, room.dims[0] - margin),
                 rng.uniform(margin, room.dims[1] - margin),
                 rng.uniform(margin, room.dims[2] - margin)};

  // jittered source positions, clamped inside the cabin
  Rng jitter_rng(derive_seed(e.rir_seed, 0x10C));
  std::vector<Vec3> positions;
  for (const auto& s : e.speakers) {
    Vec3 p = layout.seats[s.zone];
    for (int a = 0; a < 3; ++a) {
      p[a] += jitter_rng.uniform(-layout.position_jitter, layout.position_jitter);
      p[a] = std::clamp(p[a], 0.05, room.dims[a] - 0.05);
    }
    positions.push_back(p);
  }

  // dry sources
  std::vector<std::vector<double>> dry;
  std::vector<int> speaker_zones;
  for (const auto& s : e.speakers) {
    speaker_zones.push_back(s.zone);
    if (opts.source_mode == "wav-dir") {
      auto wav = read_wav(s.source_path, opts.sample_rate);
      auto& ch = wav.samples[0];
      std::vector<double> d(n, 0.0);
      for (size_t k = 0; k < n; ++k) d[k] = ch[k % std::max<size_t>(ch.size(), 1)];
      dry.push_back(std::move(d));
    } else {
      dry.push_back(synth_speech_like(s.source_seed, n, opts.sample_rate));
    }
  }
  auto dry_noise = synth_noise(e.noise_seed, n);

  auto images = render_zone_images(dry, speaker_zones, positions, dry_noise,
                                   e.noise_pos, layout, room, e.rir_seed);
  auto mixed = mix_scene(images, e);

  ClipOutput out;
  e.mixture_path = e.clip_id + "_mix.wav";
  e.target_path = e.clip_id + "_target.wav";
  out.entry = std::move(e);
  out.mixture = std::move(mixed.mixture);
  out.target = std::move(mixed.target);
  return out;
}

}  // namespace

std::vector<SceneManifestEntry> build_dataset(const SimulateOptions& opts) {
  if (opts.out_dir.empty()) throw std::invalid_argument("simulate: empty output dir");
  fs::create_directories(opts.out_dir);
  const ZoneLayout layout = ZoneLayout::standard();

  std::vector<std::string> wav_pool;
  if (opts.source_mode == "wav-dir") {
    for (const auto& p : fs::directory_iterator(opts.wav_dir))
      if (p.path().extension() == ".wav") wav_pool.push_back(p.path().string());
    std::sort(wav_pool.begin(), wav_pool.end());
    if (wav_pool.empty())
      throw std::runtime_error("wav-dir mode: no wav files in " + opts.wav_dir);
  } else if (opts.source_mode != "synthetic") {
    throw std::invalid_argument("simulate: unknown source mode " + opts.source_mode);
  }

  const int workers = opts.threads > 0
                          ? opts.threads
                          : std::max(1u, std::thread::hardware_concurrency());
  std::vector<ClipOutput> results(opts.count);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mu;
  for (int w = 0; w < std::min(workers, std::max(opts.count, 1)); ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= opts.count) return;
        try {
          results[i] = build_clip(opts, layout, wav_pool, i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::ofstream manifest(fs::path(opts.out_dir) / "manifest.jsonl",
                         std::ios::trunc);
  if (!manifest) throw std::runtime_error("cannot write manifest in " + opts.out_dir);
  std::vector<SceneManifestEntry> entries;
  for (auto& r : results) {
    const auto mix_path = fs::path(opts.out_dir) / r.entry.mixture_path;
    const auto tgt_path = fs::path(opts.out_dir) / r.entry.target_path;
    write_wav(mix_path.string(), r.mixture, opts.sample_rate, opts.float32);
    write_wav(tgt_path.string(), r.target, opts.sample_rate, opts.float32);
    manifest << manifest_entry_to_json(r.entry) << "\n";
    entries.push_back(std::move(r.entry));
  }
  return entries;
}

}  // namespace lszone
