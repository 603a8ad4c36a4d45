// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Binary weights format, little-endian:
//   magic "LSZW" | version u32 | tensor count u32 |
//   per tensor: name length u32, UTF-8 name, rank u32, dims u32[rank],
//               contiguous float32 payload
// save -> load -> save is byte-identical.

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lszone/model_config.hpp"
#include "lszone/nn/params.hpp"

namespace lszone {

constexpr uint32_t kWeightsVersion = 1;

struct RawTensor {
  std::string name;
  std::vector<uint32_t> dims;
  std::vector<float> data;
};

namespace detail {
inline void put_u32(std::string& out, uint32_t v) {
  char b[4];
  b[0] = static_cast<char>(v & 0xff);
  b[1] = static_cast<char>((v >> 8) & 0xff);
  b[2] = static_cast<char>((v >> 16) & 0xff);
  b[3] = static_cast<char>((v >> 24) & 0xff);
  out.append(b, 4);
}

struct Reader {
  const uint8_t* p;
  size_t n;
  size_t off = 0;

  void need(size_t k) const {
    if (off + k > n) throw std::runtime_error("unexpected end of file");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = static_cast<uint32_t>(p[off]) |
                 (static_cast<uint32_t>(p[off + 1]) << 8) |
                 (static_cast<uint32_t>(p[off + 2]) << 16) |
                 (static_cast<uint32_t>(p[off + 3]) << 24);
    off += 4;
    return v;
  }
  std::string str(size_t k) {
    need(k);
    std::string s(reinterpret_cast<const char*>(p + off), k);
    off += k;
    return s;
  }
  void floats(float* dst, size_t count) {
    need(count * 4);
    std::memcpy(dst, p + off, count * 4);
    off += count * 4;
  }
};
}  // namespace detail

template <typename T>
void save_weights(const ParamStore<T>& store, const std::string& path) {
  std::string out;
  out += "LSZW";
  detail::put_u32(out, kWeightsVersion);
  detail::put_u32(out, static_cast<uint32_t>(store.size()));
  for (const auto& e : store.entries()) {
    detail::put_u32(out, static_cast<uint32_t>(e.name.size()));
    out += e.name;
    detail::put_u32(out, static_cast<uint32_t>(e.dims.size()));
    for (int d : e.dims) detail::put_u32(out, static_cast<uint32_t>(d));
    for (T v : e.value) {
      float f = static_cast<float>(v);
      char b[4];
      std::memcpy(b, &f, 4);
      out.append(b, 4);
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("short write to " + path);
}

inline std::vector<RawTensor> load_weights_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  detail::Reader r{reinterpret_cast<const uint8_t*>(buf.data()), buf.size()};
  if (r.str(4) != "LSZW") throw std::runtime_error("bad magic, not a weights file");
  const uint32_t version = r.u32();
  if (version != kWeightsVersion)
    throw std::runtime_error("unsupported weights version " + std::to_string(version));
  const uint32_t count = r.u32();
  std::vector<RawTensor> tensors(count);
  for (uint32_t i = 0; i < count; ++i) {
    auto& t = tensors[i];
    const uint32_t name_len = r.u32();
    t.name = r.str(name_len);
    const uint32_t rank = r.u32();
    t.dims.resize(rank);
    size_t total = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      t.dims[d] = r.u32();
      total *= t.dims[d];
    }
    t.data.resize(total);
    r.floats(t.data.data(), total);
  }
  return tensors;
}

// Copies raw tensors into a registered store, validating names and shapes.
template <typename T>
void load_into_store(ParamStore<T>& store, const std::vector<RawTensor>& tensors) {
  if (tensors.size() != store.size())
    throw std::runtime_error("tensor count mismatch: file has " +
                             std::to_string(tensors.size()) + ", model expects " +
                             std::to_string(store.size()));
  for (const auto& t : tensors) {
    const int h = store.find(t.name);
    if (h < 0) throw std::runtime_error("unexpected tensor: " + t.name);
    auto& e = store[h];
    bool ok = e.dims.size() == t.dims.size();
    for (size_t d = 0; ok && d < t.dims.size(); ++d)
      ok = static_cast<uint32_t>(e.dims[d]) == t.dims[d];
    if (!ok) throw std::runtime_error("shape mismatch: " + t.name);
    for (size_t i = 0; i < t.data.size(); ++i) e.value[i] = static_cast<T>(t.data[i]);
  }
}

// Reconstructs the architecture hyperparameters from the shape table.
// gate_mode and the mel band edges are not stored; they keep their defaults.
inline ModelConfig infer_config_from_weights(const std::vector<RawTensor>& tensors,
                                             const StftConfig& stft) {
  ModelConfig cfg;
  cfg.stft = stft;
  auto find = [&](const std::string& name) -> const RawTensor* {
    for (const auto& t : tensors)
      if (t.name == name) return &t;
    return nullptr;
  };
  const RawTensor* enc = find("encoder.w");
  const RawTensor* proj = find("spaiec.proj.w");
  const RawTensor* dec = find("decoder.w");
  if (!enc || !proj || !dec || enc->dims.size() != 3 || proj->dims.size() != 2)
    throw std::runtime_error("weights file lacks core tensors");
  cfg.encoder_kernel = static_cast<int>(enc->dims[0]);
  cfg.zones = static_cast<int>(enc->dims[1]);
  cfg.hidden = static_cast<int>(enc->dims[2]);
  cfg.n_mel = static_cast<int>(proj->dims[1]);
  if (static_cast<int>(proj->dims[0]) != stft.bins())
    throw std::runtime_error("weights file bin count disagrees with stft config");

  int blocks = 0;
  while (find("cnp." + std::to_string(blocks) + ".cross.ln.gain")) ++blocks;
  cfg.blocks = blocks;
  if (blocks > 0) {
    const RawTensor* gru = find("cnp.0.narrow.gru.w");
    const RawTensor* dw = find("cnp.0.cross.dw.w");
    const RawTensor* gc = find("cnp.0.cross.gc.w");
    if (!gru || !dw || !gc) throw std::runtime_error("weights file lacks cnp tensors");
    cfg.hidden_units = static_cast<int>(gru->dims[1]) / 3;
    cfg.crossband_kernel = static_cast<int>(dw->dims[0]);
    cfg.crossband_groups = cfg.hidden / static_cast<int>(gc->dims[1]);
  }
  const RawTensor* pm = find("spaiec.pair_merge.w");
  const RawTensor* gate = find("spaiec.gate.w");
  if (pm) cfg.squeezer_kernel = static_cast<int>(pm->dims[0]);
  if (gate) cfg.gate_kernel = static_cast<int>(gate->dims[0]);
  return cfg;
}

}  // namespace lszone
