// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lszone/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace lszone {

double si_sdr(const std::vector<double>& estimate, const std::vector<double>& reference) {
  if (estimate.size() != reference.size())
    throw std::invalid_argument("si_sdr: length mismatch");
  double ref_energy = 0.0, dot = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    ref_energy += reference[i] * reference[i];
    dot += estimate[i] * reference[i];
  }
  if (ref_energy <= 0.0) throw std::invalid_argument("si_sdr: zero reference");
  const double alpha = dot / ref_energy;
  double target_energy = 0.0, error_energy = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double t = alpha * reference[i];
    const double e = estimate[i] - t;
    target_energy += t * t;
    error_energy += e * e;
  }
  if (error_energy <= 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(target_energy / error_energy));
}

LeakageReport leakage_db(const std::vector<std::vector<double>>& separated,
                         const std::vector<int>& active_zones) {
  const int zones = static_cast<int>(separated.size());
  std::vector<bool> active(zones, false);
  for (int z : active_zones) {
    if (z < 0 || z >= zones) throw std::invalid_argument("leakage: bad zone index");
    active[z] = true;
  }
  std::vector<double> energy(zones, 0.0);
  for (int z = 0; z < zones; ++z)
    for (double v : separated[z]) energy[z] += v * v;

  double active_energy = 0.0, inactive_energy = 0.0;
  for (int z = 0; z < zones; ++z)
    (active[z] ? active_energy : inactive_energy) += energy[z];
  if (active_energy <= 0.0)
    throw std::invalid_argument("leakage: no energy in active zones");

  LeakageReport rep;
  rep.per_zone_db.resize(zones);
  for (int z = 0; z < zones; ++z)
    rep.per_zone_db[z] =
        10.0 * std::log10(std::max(energy[z], 1e-300) / active_energy);
  rep.aggregate_db =
      10.0 * std::log10(std::max(inactive_energy, 1e-300) / active_energy);
  return rep;
}

TranscriptSet load_transcripts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open transcripts " + path);
  TranscriptSet set;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& ex) {
      throw std::runtime_error("transcripts line " + std::to_string(lineno) +
                               ": " + ex.what());
    }
    const auto key = std::make_pair(j.at("clip").get<std::string>(),
                                    j.at("zone").get<int>());
    set.text[key] = j.at("text").get<std::string>();
    if (j.contains("cer")) set.cer[key] = j.at("cer").get<double>();
  }
  return set;
}

namespace {
bool non_empty_text(const std::string& s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return !std::isspace(c); });
}
}  // namespace

FirReport compute_fir(const TranscriptSet& transcripts,
                      const std::vector<SceneManifestEntry>& manifest,
                      bool per_clip) {
  FirReport rep;
  rep.per_clip = per_clip;
  std::vector<std::string> missing;
  double cer_sum = 0.0;
  uint64_t cer_count = 0;

  for (const auto& e : manifest) {
    const int zones = ZoneLayout::kZones;
    std::vector<bool> active(zones, false);
    for (int z : e.active_zones) active[z] = true;
    const int P = static_cast<int>(e.active_zones.size());

    uint64_t clip_intrusions = 0, clip_inactive = 0;
    for (int z = 0; z < zones; ++z) {
      const auto key = std::make_pair(e.clip_id, z);
      const auto it = transcripts.text.find(key);
      if (it == transcripts.text.end()) {
        missing.push_back(e.clip_id + "/zone" + std::to_string(z));
        continue;
      }
      if (active[z]) {
        const auto cit = transcripts.cer.find(key);
        if (cit != transcripts.cer.end()) {
          cer_sum += cit->second;
          ++cer_count;
        }
        continue;
      }
      ++clip_inactive;
      if (non_empty_text(it->second)) ++clip_intrusions;
    }

    auto& bucket = rep.by_speaker_count[P];
    if (per_clip) {
      if (clip_inactive > 0) {
        ++rep.denominator;
        ++bucket.second;
        if (clip_intrusions > 0) {
          ++rep.numerator;
          ++bucket.first;
        }
      }
    } else {
      rep.denominator += clip_inactive;
      bucket.second += clip_inactive;
      rep.numerator += clip_intrusions;
      bucket.first += clip_intrusions;
    }
  }

  if (!missing.empty()) {
    std::string msg = "transcripts missing " + std::to_string(missing.size()) +
                      " entries:";
    for (size_t i = 0; i < std::min<size_t>(missing.size(), 8); ++i)
      msg += " " + missing[i];
    if (missing.size() > 8) msg += " ...";
    throw std::runtime_error(msg);
  }
  rep.fir = rep.denominator == 0
                ? 0.0
                : static_cast<double>(rep.numerator) / rep.denominator;
  if (cer_count > 0) rep.mean_cer = cer_sum / static_cast<double>(cer_count);
  return rep;
}

}  // namespace lszone
