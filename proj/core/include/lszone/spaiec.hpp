// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// SpaIEC front-end: squeeze the IPD stack down to mel resolution and
// gate-fuse it with the mel spectrogram. All parameters are shared across
// zones; every operation is frame-local.

#pragma once

#include <vector>

#include "lszone/ipd.hpp"
#include "lszone/mel.hpp"
#include "lszone/model_config.hpp"
#include "lszone/nn/kernels.hpp"
#include "lszone/nn/params.hpp"

namespace lszone {

struct SpaiecParams {
  ConvSpec pair_merge;  // (Z-1) -> 1 over the linear-frequency axis
  ConvSpec gate;        // 2 -> 1 over the mel axis
  int pm_w = -1, pm_b = -1;
  int proj_w = -1, proj_b = -1;  // linear F -> N_mel
  int gate_w = -1, gate_b = -1;
  int bins = 0, n_mel = 0, zones = 0;
  GateMode mode = GateMode::Convex;
};

template <typename T>
SpaiecParams register_spaiec(ParamStore<T>& store, const ModelConfig& cfg) {
  SpaiecParams p;
  p.bins = cfg.stft.bins();
  p.n_mel = cfg.n_mel;
  p.zones = cfg.zones;
  p.mode = cfg.gate_mode;
  p.pair_merge = ConvSpec{.in_ch = cfg.zones - 1, .out_ch = 1,
                          .kernel = cfg.squeezer_kernel, .groups = 1,
                          .axis = ConvAxis::Band, .pad = ConvPad::Same};
  p.gate = ConvSpec{.in_ch = 2, .out_ch = 1, .kernel = cfg.gate_kernel,
                    .groups = 1, .axis = ConvAxis::Band, .pad = ConvPad::Same};
  p.pm_w = store.add("spaiec.pair_merge.w", p.pair_merge.weight_dims(),
                     p.pair_merge.in_per_group() * p.pair_merge.kernel);
  p.pm_b = store.add("spaiec.pair_merge.b", {1}, 0);
  p.proj_w = store.add("spaiec.proj.w", {p.bins, p.n_mel}, p.bins);
  p.proj_b = store.add("spaiec.proj.b", {p.n_mel}, 0);
  p.gate_w = store.add("spaiec.gate.w", p.gate.weight_dims(),
                       p.gate.in_per_group() * p.gate.kernel);
  p.gate_b = store.add("spaiec.gate.b", {1}, 0);
  return p;
}

// Squeezed IPD shares MelFeature's [frame][zone][mel] layout.
template <typename T>
using IpdFeature = MelFeature<T>;

template <typename T>
struct SpaiecCache {
  // squeezer intermediates per (frame, zone)
  std::vector<T> pair_stack;  // T*Z * (Z-1)*bins, conv input layout
  std::vector<T> merged;      // T*Z * bins, conv output = projection input
  // gate intermediates
  std::vector<T> gate_in;     // T*Z * 2*n_mel
  std::vector<T> g;           // T*Z * n_mel, sigmoid outputs
};

// One (frame, zone) squeeze: [Z-1][bins] slab -> n_mel vector.
// pair_scratch must be a Tensor3(Z-1, bins, 1); merged_scratch Tensor3(1, bins, 1).
template <typename T>
void squeeze_ipd_slab(const T* ipd_slab, const SpaiecParams& p,
                      const ParamStore<T>& store, Tensor3<T>& pair_scratch,
                      Tensor3<T>& merged_scratch, T* out) {
  const int pairs = p.zones - 1;
  for (int f = 0; f < p.bins; ++f) {
    T* dst = pair_scratch.pos(f, 0);
    for (int k = 0; k < pairs; ++k) dst[k] = ipd_slab[static_cast<size_t>(k) * p.bins + f];
  }
  conv1d_forward(pair_scratch, p.pair_merge, store[p.pm_w].value.data(),
                 store[p.pm_b].value.data(), merged_scratch);
  linear_forward(merged_scratch.v.data(), 1, p.bins, p.n_mel,
                 store[p.proj_w].value.data(), store[p.proj_b].value.data(), out);
}

template <typename T>
IpdFeature<T> squeeze_ipd(const IpdTensor<T>& ipd, const SpaiecParams& p,
                          const ParamStore<T>& store, SpaiecCache<T>* cache) {
  if (ipd.zones != p.zones || ipd.bins != p.bins)
    throw std::invalid_argument("spaiec: ipd shape mismatch");
  IpdFeature<T> out(p.n_mel, ipd.frames, ipd.zones);
  Tensor3<T> pair_scratch(p.zones - 1, p.bins, 1), merged_scratch;
  const size_t slab_elems = static_cast<size_t>(p.zones - 1) * p.bins;
  if (cache) {
    cache->pair_stack.resize(static_cast<size_t>(ipd.frames) * p.zones * slab_elems);
    cache->merged.resize(static_cast<size_t>(ipd.frames) * p.zones * p.bins);
  }
  for (int t = 0; t < ipd.frames; ++t)
    for (int z = 0; z < p.zones; ++z) {
      squeeze_ipd_slab(ipd.slab(z, t), p, store, pair_scratch, merged_scratch,
                       out.vec(t, z));
      if (cache) {
        const size_t idx = static_cast<size_t>(t) * p.zones + z;
        std::copy(pair_scratch.v.begin(), pair_scratch.v.end(),
                  cache->pair_stack.begin() + idx * slab_elems);
        std::copy(merged_scratch.v.begin(), merged_scratch.v.end(),
                  cache->merged.begin() + idx * p.bins);
      }
    }
  return out;
}

// One (frame, zone) fusion. stack_scratch: Tensor3(2, n_mel, 1); logit_scratch:
// Tensor3(1, n_mel, 1). g_out may be null when no cache is wanted.
template <typename T>
void gate_fuse_vec(const T* mel_vec, const T* ipd_vec, const SpaiecParams& p,
                   const ParamStore<T>& store, Tensor3<T>& stack_scratch,
                   Tensor3<T>& logit_scratch, T* out, T* g_out) {
  for (int m = 0; m < p.n_mel; ++m) {
    T* dst = stack_scratch.pos(m, 0);
    dst[0] = mel_vec[m];
    dst[1] = ipd_vec[m];
  }
  conv1d_forward(stack_scratch, p.gate, store[p.gate_w].value.data(),
                 store[p.gate_b].value.data(), logit_scratch);
  for (int m = 0; m < p.n_mel; ++m) {
    const T g = sigmoid(logit_scratch.v[m]);
    if (g_out) g_out[m] = g;
    out[m] = p.mode == GateMode::Convex
                 ? g * mel_vec[m] + (T(1) - g) * ipd_vec[m]
                 : g * mel_vec[m];
  }
}

template <typename T>
MelFeature<T> gate_fuse(const MelFeature<T>& x_mel, const IpdFeature<T>& ipd_feat,
                        const SpaiecParams& p, const ParamStore<T>& store,
                        SpaiecCache<T>* cache) {
  if (x_mel.n_mel != p.n_mel || ipd_feat.n_mel != p.n_mel ||
      x_mel.frames != ipd_feat.frames || x_mel.channels != ipd_feat.channels)
    throw std::invalid_argument("spaiec: fusion shape mismatch");
  MelFeature<T> out(p.n_mel, x_mel.frames, x_mel.channels);
  Tensor3<T> stack_scratch(2, p.n_mel, 1), logit_scratch;
  if (cache) {
    cache->gate_in.resize(static_cast<size_t>(x_mel.frames) * p.zones * 2 * p.n_mel);
    cache->g.resize(static_cast<size_t>(x_mel.frames) * p.zones * p.n_mel);
  }
  for (int t = 0; t < x_mel.frames; ++t)
    for (int z = 0; z < x_mel.channels; ++z) {
      const size_t idx = static_cast<size_t>(t) * p.zones + z;
      gate_fuse_vec(x_mel.vec(t, z), ipd_feat.vec(t, z), p, store, stack_scratch,
                    logit_scratch, out.vec(t, z),
                    cache ? cache->g.data() + idx * p.n_mel : nullptr);
      if (cache)
        std::copy(stack_scratch.v.begin(), stack_scratch.v.end(),
                  cache->gate_in.begin() + idx * 2 * p.n_mel);
    }
  return out;
}

// Backward through fusion and squeezer. grad_xs is dL/dX_s; parameter grads
// accumulate into the store. The mel input needs no gradient (it is a fixed
// feature), so only the IPD-feature path propagates further back.
template <typename T>
void spaiec_backward(const MelFeature<T>& x_mel, const IpdFeature<T>& ipd_feat,
                     const SpaiecParams& p, ParamStore<T>& store,
                     const SpaiecCache<T>& cache, const MelFeature<T>& grad_xs) {
  const int frames = x_mel.frames, zones = x_mel.channels, M = p.n_mel;
  MelFeature<T> grad_ipd_feat(M, frames, zones);

  Tensor3<T> stack(2, M, 1), dlogit(1, M, 1), dstack;
  for (int t = 0; t < frames; ++t)
    for (int z = 0; z < zones; ++z) {
      const size_t idx = static_cast<size_t>(t) * zones + z;
      const T* g = cache.g.data() + idx * M;
      const T* a = x_mel.vec(t, z);
      const T* b = ipd_feat.vec(t, z);
      const T* dxs = grad_xs.vec(t, z);
      T* dife = grad_ipd_feat.vec(t, z);
      for (int m = 0; m < M; ++m) {
        const T gm = g[m];
        T dl;
        if (p.mode == GateMode::Convex) {
          dife[m] = dxs[m] * (T(1) - gm);
          dl = dxs[m] * (a[m] - b[m]) * gm * (T(1) - gm);
        } else {
          dife[m] = T(0);
          dl = dxs[m] * a[m] * gm * (T(1) - gm);
        }
        dlogit.v[m] = dl;
      }
      std::copy(cache.gate_in.begin() + idx * 2 * M,
                cache.gate_in.begin() + (idx + 1) * 2 * M, stack.v.begin());
      dstack = Tensor3<T>(2, M, 1);
      conv1d_backward(stack, p.gate, store[p.gate_w].value.data(), dlogit, &dstack,
                      store[p.gate_w].grad.data(), store[p.gate_b].grad.data());
      for (int m = 0; m < M; ++m) {
        // channel 0 feeds x_mel (no upstream grad wanted); channel 1 feeds ipd
        dife[m] += dstack.pos(m, 0)[1];
      }
    }

  // squeezer backward
  const int pairs = p.zones - 1;
  const size_t slab_elems = static_cast<size_t>(pairs) * p.bins;
  Tensor3<T> pair_stack(pairs, p.bins, 1), dmerged_t(1, p.bins, 1);
  std::vector<T> dmerged(p.bins);
  for (int t = 0; t < frames; ++t)
    for (int z = 0; z < zones; ++z) {
      const size_t idx = static_cast<size_t>(t) * zones + z;
      const T* merged = cache.merged.data() + idx * p.bins;
      std::fill(dmerged.begin(), dmerged.end(), T(0));
      linear_backward(merged, 1, p.bins, M, store[p.proj_w].value.data(),
                      grad_ipd_feat.vec(t, z), dmerged.data(),
                      store[p.proj_w].grad.data(), store[p.proj_b].grad.data());
      std::copy(dmerged.begin(), dmerged.end(), dmerged_t.v.begin());
      std::copy(cache.pair_stack.begin() + idx * slab_elems,
                cache.pair_stack.begin() + (idx + 1) * slab_elems,
                pair_stack.v.begin());
      conv1d_backward(pair_stack, p.pair_merge, store[p.pm_w].value.data(),
                      dmerged_t, static_cast<Tensor3<T>*>(nullptr),
                      store[p.pm_w].grad.data(), store[p.pm_b].grad.data());
    }
}

}  // namespace lszone
