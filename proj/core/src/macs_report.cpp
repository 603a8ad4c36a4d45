// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lszone/macs_report.hpp"

#include <cassert>
#include <cstdio>

#include "lszone/nn/kernels.hpp"

namespace lszone {

namespace {

// per-frame MACs * sample_rate / hop, exact in integers
uint64_t per_second(uint64_t per_frame, const StftConfig& stft) {
  const uint64_t scaled = per_frame * static_cast<uint64_t>(stft.sample_rate);
  assert(scaled % static_cast<uint64_t>(stft.hop) == 0);
  return scaled / static_cast<uint64_t>(stft.hop);
}

}  // namespace

MacsReport report_macs(const ModelConfig& cfg) {
  cfg.validate();
  MacsReport rep;
  const uint64_t Z = cfg.zones, F = cfg.stft.bins(), M = cfg.n_mel;
  const uint64_t H = cfg.hidden, HU = cfg.hidden_units;
  rep.frames_per_second =
      static_cast<double>(cfg.stft.sample_rate) / cfg.stft.hop;

  auto add_layer = [&](const std::string& name, uint64_t per_frame) {
    rep.layers.push_back({name, per_second(per_frame, cfg.stft)});
    return rep.layers.back().per_second;
  };

  // SpaIEC (shared weights applied once per zone per frame)
  uint64_t spaiec = 0;
  spaiec += add_layer("spaiec.pair_merge", Z * F * 1 * (Z - 1) * cfg.squeezer_kernel);
  spaiec += add_layer("spaiec.proj", Z * F * M);
  spaiec += add_layer("spaiec.gate", Z * M * 1 * 2 * cfg.gate_kernel);
  rep.subtotals.push_back({"spaiec", spaiec});

  const uint64_t enc = add_layer("encoder", M * H * Z * cfg.encoder_kernel);
  rep.subtotals.push_back({"encoder", enc});

  for (int i = 0; i < cfg.blocks; ++i) {
    const std::string p = "cnp." + std::to_string(i);
    uint64_t blk = 0;
    blk += add_layer(p + ".cross.dw", M * H * 1 * cfg.crossband_kernel);
    blk += add_layer(p + ".cross.pw", M * H * H);
    blk += add_layer(p + ".cross.gc",
                     M * H * (H / cfg.crossband_groups) * cfg.crossband_kernel);
    blk += add_layer(p + ".narrow.gru", M * 3 * (H * HU + HU * HU));
    blk += add_layer(p + ".narrow.lin", M * HU * H);
    rep.subtotals.push_back({p, blk});
  }

  const uint64_t dec = add_layer("decoder", M * H * Z);
  rep.subtotals.push_back({"decoder", dec});

  rep.total = 0;
  for (const auto& s : rep.subtotals) rep.total += s.per_second;
  rep.param_count = analytic_param_count(cfg);
  return rep;
}

uint64_t analytic_param_count(const ModelConfig& cfg) {
  const uint64_t Z = cfg.zones, F = cfg.stft.bins(), M = cfg.n_mel;
  const uint64_t H = cfg.hidden, HU = cfg.hidden_units;
  uint64_t n = 0;
  n += (Z - 1) * cfg.squeezer_kernel + 1;  // pair merge conv
  n += F * M + M;                          // projection
  n += 2 * cfg.gate_kernel + 1;            // gate conv
  n += Z * cfg.encoder_kernel * H + H;     // encoder
  const uint64_t block = 2 * H                                      // cross ln
                         + H * cfg.crossband_kernel + H             // depthwise
                         + H * H + H                                // pointwise
                         + H * (H / cfg.crossband_groups) * cfg.crossband_kernel +
                         H                                          // grouped
                         + 2 * H                                    // narrow ln
                         + 3 * (H * HU + HU * HU + HU)              // gru
                         + HU * H + H;                              // linear
  n += static_cast<uint64_t>(cfg.blocks) * block;
  n += H * Z + Z;  // decoder
  return n;
}

std::string MacsReport::to_text() const {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "MACs per second of audio (%.1f frames/s)\n",
                frames_per_second);
  out += buf;
  for (const auto& l : layers) {
    std::snprintf(buf, sizeof(buf), "  %-22s %14llu\n", l.name.c_str(),
                  static_cast<unsigned long long>(l.per_second));
    out += buf;
  }
  out += "subtotals:\n";
  for (const auto& s : subtotals) {
    std::snprintf(buf, sizeof(buf), "  %-22s %14llu\n", s.name.c_str(),
                  static_cast<unsigned long long>(s.per_second));
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "total MACs/s: %llu (%.4f G)\n",
                static_cast<unsigned long long>(total), total / 1e9);
  out += buf;
  std::snprintf(buf, sizeof(buf), "parameters:   %llu (%.4f M)\n",
                static_cast<unsigned long long>(param_count), param_count / 1e6);
  out += buf;
  return out;
}

}  // namespace lszone
