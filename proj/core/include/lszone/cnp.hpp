// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Conv-GRU CNP block: a frame-local Conv Crossband sub-block (spatial x
// frequency) followed by a causal GRU Narrowband sub-block (spatial x time,
// weights shared across mel bins). Both wrap their branch in a residual.

#pragma once

#include <string>
#include <vector>

#include "lszone/model_config.hpp"
#include "lszone/nn/kernels.hpp"
#include "lszone/nn/params.hpp"

namespace lszone {

struct CnpBlockParams {
  ConvSpec dw;  // depthwise over mel, kernel crossband_kernel
  ConvSpec pw;  // pointwise H -> H
  ConvSpec gc;  // grouped over mel, crossband_groups
  int ln1_g = -1, ln1_b = -1;
  int dw_w = -1, dw_b = -1;
  int pw_w = -1, pw_b = -1;
  int gc_w = -1, gc_b = -1;
  int ln2_g = -1, ln2_b = -1;
  int gru_w = -1, gru_u = -1, gru_b = -1;
  int lin_w = -1, lin_b = -1;
  int hidden = 0;        // H
  int hidden_units = 0;  // GRU width
};

template <typename T>
CnpBlockParams register_cnp_block(ParamStore<T>& store, const ModelConfig& cfg,
                                  const std::string& prefix) {
  CnpBlockParams p;
  p.hidden = cfg.hidden;
  p.hidden_units = cfg.hidden_units;
  const int H = cfg.hidden;
  p.dw = ConvSpec{.in_ch = H, .out_ch = H, .kernel = cfg.crossband_kernel,
                  .groups = H, .axis = ConvAxis::Band, .pad = ConvPad::Same};
  p.pw = ConvSpec{.in_ch = H, .out_ch = H, .kernel = 1, .groups = 1,
                  .axis = ConvAxis::Band, .pad = ConvPad::Same};
  p.gc = ConvSpec{.in_ch = H, .out_ch = H, .kernel = cfg.crossband_kernel,
                  .groups = cfg.crossband_groups, .axis = ConvAxis::Band,
                  .pad = ConvPad::Same};
  p.ln1_g = store.add(prefix + ".cross.ln.gain", {H}, -1);
  p.ln1_b = store.add(prefix + ".cross.ln.bias", {H}, 0);
  p.dw_w = store.add(prefix + ".cross.dw.w", p.dw.weight_dims(),
                     p.dw.in_per_group() * p.dw.kernel);
  p.dw_b = store.add(prefix + ".cross.dw.b", {H}, 0);
  p.pw_w = store.add(prefix + ".cross.pw.w", p.pw.weight_dims(),
                     p.pw.in_per_group() * p.pw.kernel);
  p.pw_b = store.add(prefix + ".cross.pw.b", {H}, 0);
  p.gc_w = store.add(prefix + ".cross.gc.w", p.gc.weight_dims(),
                     p.gc.in_per_group() * p.gc.kernel);
  p.gc_b = store.add(prefix + ".cross.gc.b", {H}, 0);
  p.ln2_g = store.add(prefix + ".narrow.ln.gain", {H}, -1);
  p.ln2_b = store.add(prefix + ".narrow.ln.bias", {H}, 0);
  p.gru_w = store.add(prefix + ".narrow.gru.w", {H, 3 * cfg.hidden_units}, H);
  p.gru_u = store.add(prefix + ".narrow.gru.u",
                      {cfg.hidden_units, 3 * cfg.hidden_units}, cfg.hidden_units);
  p.gru_b = store.add(prefix + ".narrow.gru.b", {3 * cfg.hidden_units}, 0);
  p.lin_w = store.add(prefix + ".narrow.lin.w", {cfg.hidden_units, H},
                      cfg.hidden_units);
  p.lin_b = store.add(prefix + ".narrow.lin.b", {H}, 0);
  return p;
}

// Per-stream recurrent state: one GRU hidden matrix [n_mel x hidden_units]
// per block, reset to zeros at stream start.
template <typename T>
struct CnpState {
  std::vector<std::vector<T>> h;  // [block][n_mel * hidden_units]

  static CnpState zeros(int blocks, int n_mel, int hidden_units) {
    CnpState s;
    s.h.assign(blocks,
               std::vector<T>(static_cast<size_t>(n_mel) * hidden_units, T(0)));
    return s;
  }
};

template <typename T>
struct CrossbandCache {
  LayerNormCache<T> ln;
  Tensor3<T> ln_out, c1, s1, c2, s2;
};

template <typename T>
void conv_crossband_forward(const Tensor3<T>& x, const CnpBlockParams& p,
                            const ParamStore<T>& store, Tensor3<T>& out,
                            CrossbandCache<T>* cache) {
  const int n = x.bands * x.frames;
  Tensor3<T> local_ln;
  Tensor3<T>& ln_out = cache ? cache->ln_out : local_ln;
  ln_out = Tensor3<T>(x.features, x.bands, x.frames);
  layernorm_forward(x.v.data(), n, x.features, store[p.ln1_g].value.data(),
                    store[p.ln1_b].value.data(), ln_out.v.data(),
                    cache ? &cache->ln : nullptr);

  Tensor3<T> local_c1, local_s1, local_c2, local_s2;
  Tensor3<T>& c1 = cache ? cache->c1 : local_c1;
  Tensor3<T>& s1 = cache ? cache->s1 : local_s1;
  Tensor3<T>& c2 = cache ? cache->c2 : local_c2;
  Tensor3<T>& s2 = cache ? cache->s2 : local_s2;

  conv1d_forward(ln_out, p.dw, store[p.dw_w].value.data(),
                 store[p.dw_b].value.data(), c1);
  s1 = Tensor3<T>(c1.features, c1.bands, c1.frames);
  silu_forward(c1.v.data(), c1.v.size(), s1.v.data());
  conv1d_forward(s1, p.pw, store[p.pw_w].value.data(), store[p.pw_b].value.data(),
                 c2);
  s2 = Tensor3<T>(c2.features, c2.bands, c2.frames);
  silu_forward(c2.v.data(), c2.v.size(), s2.v.data());
  conv1d_forward(s2, p.gc, store[p.gc_w].value.data(), store[p.gc_b].value.data(),
                 out);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += x.v[i];
}

template <typename T>
void conv_crossband_backward(const Tensor3<T>& x, const CnpBlockParams& p,
                             ParamStore<T>& store, const CrossbandCache<T>& cache,
                             const Tensor3<T>& grad_out, Tensor3<T>& grad_x) {
  const int n = x.bands * x.frames;
  Tensor3<T> ds2(x.features, x.bands, x.frames);
  conv1d_backward(cache.s2, p.gc, store[p.gc_w].value.data(), grad_out, &ds2,
                  store[p.gc_w].grad.data(), store[p.gc_b].grad.data());
  Tensor3<T> dc2(x.features, x.bands, x.frames);
  silu_backward(cache.c2.v.data(), dc2.v.size(), ds2.v.data(), dc2.v.data());
  Tensor3<T> ds1(x.features, x.bands, x.frames);
  conv1d_backward(cache.s1, p.pw, store[p.pw_w].value.data(), dc2, &ds1,
                  store[p.pw_w].grad.data(), store[p.pw_b].grad.data());
  Tensor3<T> dc1(x.features, x.bands, x.frames);
  silu_backward(cache.c1.v.data(), dc1.v.size(), ds1.v.data(), dc1.v.data());
  Tensor3<T> dln(x.features, x.bands, x.frames);
  conv1d_backward(cache.ln_out, p.dw, store[p.dw_w].value.data(), dc1, &dln,
                  store[p.dw_w].grad.data(), store[p.dw_b].grad.data());
  grad_x = Tensor3<T>(x.features, x.bands, x.frames);
  layernorm_backward(cache.ln, n, x.features, store[p.ln1_g].value.data(),
                     dln.v.data(), grad_x.v.data(), store[p.ln1_g].grad.data(),
                     store[p.ln1_b].grad.data());
  for (size_t i = 0; i < grad_x.v.size(); ++i) grad_x.v[i] += grad_out.v[i];
}

template <typename T>
struct NarrowbandCache {
  LayerNormCache<T> ln;
  Tensor3<T> ln_out;
  Tensor3<T> gru_y;
  GruCache<T> gru;
  std::vector<T> h0;
};

// state is the per-bin GRU hidden matrix and is advanced in place.
template <typename T>
void gru_narrowband_forward(const Tensor3<T>& x, const CnpBlockParams& p,
                            const ParamStore<T>& store, std::vector<T>& state,
                            Tensor3<T>& out, NarrowbandCache<T>* cache) {
  const int n = x.bands * x.frames;
  Tensor3<T> local_ln, local_gru_y;
  Tensor3<T>& ln_out = cache ? cache->ln_out : local_ln;
  ln_out = Tensor3<T>(x.features, x.bands, x.frames);
  layernorm_forward(x.v.data(), n, x.features, store[p.ln2_g].value.data(),
                    store[p.ln2_b].value.data(), ln_out.v.data(),
                    cache ? &cache->ln : nullptr);

  if (cache) cache->h0 = state;
  Tensor3<T>& gru_y = cache ? cache->gru_y : local_gru_y;
  std::vector<T> h_next;
  gru_forward(ln_out, state, p.hidden_units, store[p.gru_w].value.data(),
              store[p.gru_u].value.data(), store[p.gru_b].value.data(), gru_y,
              h_next, cache ? &cache->gru : nullptr);
  state = std::move(h_next);

  if (!out.same_shape(x)) out = Tensor3<T>(x.features, x.bands, x.frames);
  linear_forward(gru_y.v.data(), n, p.hidden_units, p.hidden,
                 store[p.lin_w].value.data(), store[p.lin_b].value.data(),
                 out.v.data());
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += x.v[i];
}

template <typename T>
void gru_narrowband_backward(const Tensor3<T>& x, const CnpBlockParams& p,
                             ParamStore<T>& store, const NarrowbandCache<T>& cache,
                             const Tensor3<T>& grad_out, Tensor3<T>& grad_x) {
  const int n = x.bands * x.frames;
  Tensor3<T> dgru_y(p.hidden_units, x.bands, x.frames);
  linear_backward(cache.gru_y.v.data(), n, p.hidden_units, p.hidden,
                  store[p.lin_w].value.data(), grad_out.v.data(), dgru_y.v.data(),
                  store[p.lin_w].grad.data(), store[p.lin_b].grad.data());
  Tensor3<T> dln(x.features, x.bands, x.frames);
  gru_backward(cache.ln_out, cache.h0, p.hidden_units,
               store[p.gru_w].value.data(), store[p.gru_u].value.data(),
               cache.gru_y, cache.gru, dgru_y, static_cast<const T*>(nullptr),
               &dln, store[p.gru_w].grad.data(), store[p.gru_u].grad.data(),
               store[p.gru_b].grad.data(), static_cast<T*>(nullptr));
  grad_x = Tensor3<T>(x.features, x.bands, x.frames);
  layernorm_backward(cache.ln, n, x.features, store[p.ln2_g].value.data(),
                     dln.v.data(), grad_x.v.data(), store[p.ln2_g].grad.data(),
                     store[p.ln2_b].grad.data());
  for (size_t i = 0; i < grad_x.v.size(); ++i) grad_x.v[i] += grad_out.v[i];
}

template <typename T>
struct CnpBlockCache {
  CrossbandCache<T> cross;
  NarrowbandCache<T> narrow;
  Tensor3<T> cross_out;  // input to the narrowband sub-block
};

// crossband then narrowband; advances the block's slice of the stream state
template <typename T>
void cnp_forward(const Tensor3<T>& x, const CnpBlockParams& p,
                 const ParamStore<T>& store, std::vector<T>& state,
                 Tensor3<T>& out, CnpBlockCache<T>* cache) {
  Tensor3<T> local_mid;
  Tensor3<T>& mid = cache ? cache->cross_out : local_mid;
  conv_crossband_forward(x, p, store, mid, cache ? &cache->cross : nullptr);
  gru_narrowband_forward(mid, p, store, state, out,
                         cache ? &cache->narrow : nullptr);
}

template <typename T>
void cnp_backward(const Tensor3<T>& x, const CnpBlockParams& p,
                  ParamStore<T>& store, const CnpBlockCache<T>& cache,
                  const Tensor3<T>& grad_out, Tensor3<T>& grad_x) {
  Tensor3<T> dmid;
  gru_narrowband_backward(cache.cross_out, p, store, cache.narrow, grad_out, dmid);
  conv_crossband_backward(x, p, store, cache.cross, dmid, grad_x);
}

}  // namespace lszone
