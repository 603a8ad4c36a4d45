// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Hand-written differentiable primitives. Inner loops are arranged in
// axpy form (scalar times a contiguous row accumulated into a contiguous
// row) so the compiler can vectorize them without reassociating reductions.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lszone/tensor.hpp"

namespace lszone {

enum class ConvAxis { Band, Time };
enum class ConvPad { Same, Causal };

struct ConvSpec {
  int in_ch = 0;
  int out_ch = 0;
  int kernel = 1;
  int groups = 1;
  ConvAxis axis = ConvAxis::Band;
  ConvPad pad = ConvPad::Same;
  bool bias = true;

  void validate() const {
    if (in_ch <= 0 || out_ch <= 0 || kernel <= 0 || groups <= 0)
      throw std::invalid_argument("conv: nonpositive dims");
    if (in_ch % groups != 0 || out_ch % groups != 0)
      throw std::invalid_argument("conv: channels not divisible by groups");
    if (pad == ConvPad::Same && kernel % 2 == 0)
      throw std::invalid_argument("conv: same padding needs odd kernel");
  }
  int in_per_group() const { return in_ch / groups; }
  int out_per_group() const { return out_ch / groups; }
  int pad_left() const { return pad == ConvPad::Same ? (kernel - 1) / 2 : kernel - 1; }

  // weight tensor dims: [kernel][in_per_group][out_ch]
  std::vector<int> weight_dims() const { return {kernel, in_per_group(), out_ch}; }
};

// ---------------------------------------------------------------- conv1d

// Grouped cross-correlation along one axis of [C x B x T]; the other axis is
// independent. Positions with out-of-range taps read zeros.
template <typename T>
void conv1d_forward(const Tensor3<T>& x, const ConvSpec& spec, const T* w,
                    const T* bias, Tensor3<T>& out) {
  spec.validate();
  if (x.features != spec.in_ch) throw std::invalid_argument("conv: in_ch mismatch");
  const int B = x.bands, F = x.frames;
  if (out.features != spec.out_ch || out.bands != B || out.frames != F)
    out = Tensor3<T>(spec.out_ch, B, F);

  const int n_pos = spec.axis == ConvAxis::Band ? B : F;
  const int n_other = spec.axis == ConvAxis::Band ? F : B;
  const int ipg = spec.in_per_group();
  const int opg = spec.out_per_group();
  const int pl = spec.pad_left();

  for (int o = 0; o < n_other; ++o) {
    // init with bias
    for (int p = 0; p < n_pos; ++p) {
      T* orow = spec.axis == ConvAxis::Band ? out.pos(p, o) : out.pos(o, p);
      if (bias)
        for (int c = 0; c < spec.out_ch; ++c) orow[c] = bias[c];
      else
        for (int c = 0; c < spec.out_ch; ++c) orow[c] = T(0);
    }
    for (int j = 0; j < spec.kernel; ++j) {
      const int shift = j - pl;
      const int p_lo = std::max(0, -shift);
      const int p_hi = std::min(n_pos, n_pos - shift);
      for (int p = p_lo; p < p_hi; ++p) {
        const T* xrow = spec.axis == ConvAxis::Band ? x.pos(p + shift, o)
                                                    : x.pos(o, p + shift);
        T* orow = spec.axis == ConvAxis::Band ? out.pos(p, o) : out.pos(o, p);
        if (spec.groups == spec.in_ch && ipg == 1 && opg == 1) {
          // depthwise: one contiguous axpy over channels
          const T* wr = w + static_cast<size_t>(j) * spec.out_ch;
          for (int c = 0; c < spec.out_ch; ++c) orow[c] += wr[c] * xrow[c];
        } else {
          for (int g = 0; g < spec.groups; ++g) {
            T* og = orow + g * opg;
            for (int ic = 0; ic < ipg; ++ic) {
              const T xv = xrow[g * ipg + ic];
              const T* wr =
                  w + (static_cast<size_t>(j) * ipg + ic) * spec.out_ch + g * opg;
              for (int oc = 0; oc < opg; ++oc) og[oc] += xv * wr[oc];
            }
          }
        }
      }
    }
  }
}

// Exact gradients of conv1d_forward. grad_x may be null at input layers;
// grad_w/grad_b accumulate.
template <typename T>
void conv1d_backward(const Tensor3<T>& x, const ConvSpec& spec, const T* w,
                     const Tensor3<T>& grad_out, Tensor3<T>* grad_x, T* grad_w,
                     T* grad_b) {
  spec.validate();
  const int B = x.bands, F = x.frames;
  const int n_pos = spec.axis == ConvAxis::Band ? B : F;
  const int n_other = spec.axis == ConvAxis::Band ? F : B;
  const int ipg = spec.in_per_group();
  const int opg = spec.out_per_group();
  const int pl = spec.pad_left();

  if (grad_x && !grad_x->same_shape(x)) *grad_x = Tensor3<T>(x.features, B, F);

  for (int o = 0; o < n_other; ++o) {
    if (grad_b) {
      for (int p = 0; p < n_pos; ++p) {
        const T* go = spec.axis == ConvAxis::Band ? grad_out.pos(p, o)
                                                  : grad_out.pos(o, p);
        for (int c = 0; c < spec.out_ch; ++c) grad_b[c] += go[c];
      }
    }
    for (int j = 0; j < spec.kernel; ++j) {
      const int shift = j - pl;
      const int p_lo = std::max(0, -shift);
      const int p_hi = std::min(n_pos, n_pos - shift);
      for (int p = p_lo; p < p_hi; ++p) {
        const T* xrow = spec.axis == ConvAxis::Band ? x.pos(p + shift, o)
                                                    : x.pos(o, p + shift);
        const T* go = spec.axis == ConvAxis::Band ? grad_out.pos(p, o)
                                                  : grad_out.pos(o, p);
        T* gx = nullptr;
        if (grad_x)
          gx = spec.axis == ConvAxis::Band ? grad_x->pos(p + shift, o)
                                           : grad_x->pos(o, p + shift);
        for (int g = 0; g < spec.groups; ++g) {
          const T* go_g = go + g * opg;
          for (int ic = 0; ic < ipg; ++ic) {
            const T xv = xrow[g * ipg + ic];
            const size_t wbase =
                (static_cast<size_t>(j) * ipg + ic) * spec.out_ch + g * opg;
            T acc = 0;
            for (int oc = 0; oc < opg; ++oc) {
              grad_w[wbase + oc] += xv * go_g[oc];
              acc += w[wbase + oc] * go_g[oc];
            }
            if (gx) gx[g * ipg + ic] += acc;
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------- linear

// y[p] = W^T x[p] + b over n contiguous positions. W stored [in][out].
template <typename T>
void linear_forward(const T* x, int n, int in_dim, int out_dim, const T* w,
                    const T* bias, T* y) {
  for (int p = 0; p < n; ++p) {
    const T* xp = x + static_cast<size_t>(p) * in_dim;
    T* yp = y + static_cast<size_t>(p) * out_dim;
    if (bias)
      for (int o = 0; o < out_dim; ++o) yp[o] = bias[o];
    else
      for (int o = 0; o < out_dim; ++o) yp[o] = T(0);
    for (int k = 0; k < in_dim; ++k) {
      const T xv = xp[k];
      const T* wr = w + static_cast<size_t>(k) * out_dim;
      for (int o = 0; o < out_dim; ++o) yp[o] += xv * wr[o];
    }
  }
}

template <typename T>
void linear_backward(const T* x, int n, int in_dim, int out_dim, const T* w,
                     const T* grad_y, T* grad_x, T* grad_w, T* grad_b) {
  for (int p = 0; p < n; ++p) {
    const T* xp = x + static_cast<size_t>(p) * in_dim;
    const T* gy = grad_y + static_cast<size_t>(p) * out_dim;
    if (grad_b)
      for (int o = 0; o < out_dim; ++o) grad_b[o] += gy[o];
    for (int k = 0; k < in_dim; ++k) {
      const T xv = xp[k];
      T* gw = grad_w + static_cast<size_t>(k) * out_dim;
      const T* wr = w + static_cast<size_t>(k) * out_dim;
      T acc = 0;
      for (int o = 0; o < out_dim; ++o) {
        gw[o] += xv * gy[o];
        acc += wr[o] * gy[o];
      }
      if (grad_x) grad_x[static_cast<size_t>(p) * in_dim + k] += acc;
    }
  }
}

// ------------------------------------------------------------- layernorm

template <typename T>
struct LayerNormCache {
  std::vector<T> xhat;     // n * dim
  std::vector<T> inv_std;  // n
};

// Per-position normalization over the feature dimension, eps = 1e-5.
template <typename T>
void layernorm_forward(const T* x, int n, int dim, const T* gain, const T* bias,
                       T* y, LayerNormCache<T>* cache) {
  const T eps = T(1e-5);
  if (cache) {
    cache->xhat.resize(static_cast<size_t>(n) * dim);
    cache->inv_std.resize(n);
  }
  for (int p = 0; p < n; ++p) {
    const T* xp = x + static_cast<size_t>(p) * dim;
    T* yp = y + static_cast<size_t>(p) * dim;
    T mean = 0;
    for (int c = 0; c < dim; ++c) mean += xp[c];
    mean /= static_cast<T>(dim);
    T var = 0;
    for (int c = 0; c < dim; ++c) {
      const T d = xp[c] - mean;
      var += d * d;
    }
    var /= static_cast<T>(dim);
    const T inv_std = T(1) / std::sqrt(var + eps);
    for (int c = 0; c < dim; ++c) {
      const T xh = (xp[c] - mean) * inv_std;
      if (cache) cache->xhat[static_cast<size_t>(p) * dim + c] = xh;
      yp[c] = xh * gain[c] + bias[c];
    }
    if (cache) cache->inv_std[p] = inv_std;
  }
}

template <typename T>
void layernorm_backward(const LayerNormCache<T>& cache, int n, int dim,
                        const T* gain, const T* grad_y, T* grad_x, T* grad_gain,
                        T* grad_bias) {
  for (int p = 0; p < n; ++p) {
    const T* gy = grad_y + static_cast<size_t>(p) * dim;
    const T* xh = cache.xhat.data() + static_cast<size_t>(p) * dim;
    T* gx = grad_x + static_cast<size_t>(p) * dim;
    T m1 = 0, m2 = 0;
    for (int c = 0; c < dim; ++c) {
      const T d = gy[c] * gain[c];
      m1 += d;
      m2 += d * xh[c];
      if (grad_gain) grad_gain[c] += gy[c] * xh[c];
      if (grad_bias) grad_bias[c] += gy[c];
    }
    m1 /= static_cast<T>(dim);
    m2 /= static_cast<T>(dim);
    const T inv_std = cache.inv_std[p];
    for (int c = 0; c < dim; ++c)
      gx[c] += (gy[c] * gain[c] - m1 - xh[c] * m2) * inv_std;
  }
}

// ------------------------------------------------------------ activations

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
void silu_forward(const T* x, size_t n, T* y) {
  for (size_t i = 0; i < n; ++i) y[i] = x[i] * sigmoid(x[i]);
}

// grad wrt x given the forward *input* x
template <typename T>
void silu_backward(const T* x, size_t n, const T* grad_y, T* grad_x) {
  for (size_t i = 0; i < n; ++i) {
    const T s = sigmoid(x[i]);
    grad_x[i] += grad_y[i] * s * (T(1) + x[i] * (T(1) - s));
  }
}

// ------------------------------------------------------------------- GRU

// r = sigmoid(W_r x + U_r h + b_r)
// u = sigmoid(W_u x + U_u h + b_u)
// n = tanh(W_n x + r .* (U_n h) + b_n)
// h' = (1 - u) .* n + u .* h
//
// All bands share weights and advance in lockstep; state is [bands][hidden].
// w: [in][3*hidden], u: [hidden][3*hidden], b: [3*hidden], gate order r|u|n.
template <typename T>
struct GruCache {
  Tensor3<T> r, u, n, q;  // q = U_n h_prev; all [hidden x bands x frames]
};

template <typename T>
void gru_forward(const Tensor3<T>& x, const std::vector<T>& h0, int hidden,
                 const T* w, const T* uw, const T* b, Tensor3<T>& y,
                 std::vector<T>& h_state, GruCache<T>* cache) {
  const int B = x.bands, F = x.frames, in_dim = x.features;
  const int g3 = 3 * hidden;
  if (!y.same_shape(Tensor3<T>(hidden, B, F))) y = Tensor3<T>(hidden, B, F);
  if (cache) {
    cache->r = Tensor3<T>(hidden, B, F);
    cache->u = Tensor3<T>(hidden, B, F);
    cache->n = Tensor3<T>(hidden, B, F);
    cache->q = Tensor3<T>(hidden, B, F);
  }
  h_state = h0;
  if (h_state.size() != static_cast<size_t>(B) * hidden)
    throw std::invalid_argument("gru: state size mismatch");

  std::vector<T> gx(static_cast<size_t>(B) * g3);
  std::vector<T> gh(static_cast<size_t>(B) * g3);
  for (int t = 0; t < F; ++t) {
    // gx = x_t W + b ; gh = h_prev U
    for (int bnd = 0; bnd < B; ++bnd) {
      T* gxp = gx.data() + static_cast<size_t>(bnd) * g3;
      for (int c = 0; c < g3; ++c) gxp[c] = b[c];
      const T* xp = x.pos(bnd, t);
      for (int k = 0; k < in_dim; ++k) {
        const T xv = xp[k];
        const T* wr = w + static_cast<size_t>(k) * g3;
        for (int c = 0; c < g3; ++c) gxp[c] += xv * wr[c];
      }
      T* ghp = gh.data() + static_cast<size_t>(bnd) * g3;
      for (int c = 0; c < g3; ++c) ghp[c] = T(0);
      const T* hp = h_state.data() + static_cast<size_t>(bnd) * hidden;
      for (int k = 0; k < hidden; ++k) {
        const T hv = hp[k];
        const T* ur = uw + static_cast<size_t>(k) * g3;
        for (int c = 0; c < g3; ++c) ghp[c] += hv * ur[c];
      }
    }
    for (int bnd = 0; bnd < B; ++bnd) {
      const T* gxp = gx.data() + static_cast<size_t>(bnd) * g3;
      const T* ghp = gh.data() + static_cast<size_t>(bnd) * g3;
      T* hp = h_state.data() + static_cast<size_t>(bnd) * hidden;
      T* yp = y.pos(bnd, t);
      for (int i = 0; i < hidden; ++i) {
        const T r = sigmoid(gxp[i] + ghp[i]);
        const T u = sigmoid(gxp[hidden + i] + ghp[hidden + i]);
        const T q = ghp[2 * hidden + i];
        const T n = std::tanh(gxp[2 * hidden + i] + r * q);
        const T hn = (T(1) - u) * n + u * hp[i];
        if (cache) {
          cache->r.at(i, bnd, t) = r;
          cache->u.at(i, bnd, t) = u;
          cache->n.at(i, bnd, t) = n;
          cache->q.at(i, bnd, t) = q;
        }
        hp[i] = hn;
        yp[i] = hn;
      }
    }
  }
}

// Backward through time. grad_y is dL/dy per step; grad_hT (optional) adds to
// the final state gradient. Parameter grads accumulate; grad_x accumulates.
template <typename T>
void gru_backward(const Tensor3<T>& x, const std::vector<T>& h0, int hidden,
                  const T* w, const T* uw, const Tensor3<T>& y,
                  const GruCache<T>& cache, const Tensor3<T>& grad_y,
                  const T* grad_hT, Tensor3<T>* grad_x, T* grad_w, T* grad_u,
                  T* grad_b, T* grad_h0) {
  const int B = x.bands, F = x.frames, in_dim = x.features;
  const int g3 = 3 * hidden;
  if (grad_x && !grad_x->same_shape(x)) *grad_x = Tensor3<T>(in_dim, B, F);

  std::vector<T> carry(static_cast<size_t>(B) * hidden, T(0));
  if (grad_hT)
    for (size_t i = 0; i < carry.size(); ++i) carry[i] = grad_hT[i];

  std::vector<T> da(static_cast<size_t>(B) * g3);   // for W side (r,u,n rows)
  std::vector<T> dau(static_cast<size_t>(B) * g3);  // for U side (r,u,q rows)

  for (int t = F - 1; t >= 0; --t) {
    for (int bnd = 0; bnd < B; ++bnd) {
      const T* gy = grad_y.pos(bnd, t);
      T* cy = carry.data() + static_cast<size_t>(bnd) * hidden;
      T* dap = da.data() + static_cast<size_t>(bnd) * g3;
      T* daup = dau.data() + static_cast<size_t>(bnd) * g3;
      for (int i = 0; i < hidden; ++i) {
        const T gh = gy[i] + cy[i];
        const T r = cache.r.at(i, bnd, t);
        const T u = cache.u.at(i, bnd, t);
        const T n = cache.n.at(i, bnd, t);
        const T q = cache.q.at(i, bnd, t);
        const T h_prev = t > 0 ? y.at(i, bnd, t - 1)
                               : h0[static_cast<size_t>(bnd) * hidden + i];
        const T dn = gh * (T(1) - u);
        const T du = gh * (h_prev - n);
        const T da_n = dn * (T(1) - n * n);
        const T dq = da_n * r;
        const T dr = da_n * q;
        const T da_r = dr * r * (T(1) - r);
        const T da_u = du * u * (T(1) - u);
        dap[i] = da_r;
        dap[hidden + i] = da_u;
        dap[2 * hidden + i] = da_n;
        daup[i] = da_r;
        daup[hidden + i] = da_u;
        daup[2 * hidden + i] = dq;
        cy[i] = gh * u;  // partial; U^T daup added below
      }
    }
    for (int bnd = 0; bnd < B; ++bnd) {
      const T* dap = da.data() + static_cast<size_t>(bnd) * g3;
      const T* daup = dau.data() + static_cast<size_t>(bnd) * g3;
      const T* xp = x.pos(bnd, t);
      // dW, db, dx
      for (int k = 0; k < in_dim; ++k) {
        const T xv = xp[k];
        T* gwr = grad_w + static_cast<size_t>(k) * g3;
        const T* wr = w + static_cast<size_t>(k) * g3;
        T acc = 0;
        for (int c = 0; c < g3; ++c) {
          gwr[c] += xv * dap[c];
          acc += wr[c] * dap[c];
        }
        if (grad_x) grad_x->pos(bnd, t)[k] += acc;
      }
      if (grad_b)
        for (int c = 0; c < g3; ++c) grad_b[c] += dap[c];
      // dU, dh_prev
      const T* hprev_vec = t > 0 ? y.pos(bnd, t - 1)
                                 : h0.data() + static_cast<size_t>(bnd) * hidden;
      T* cy = carry.data() + static_cast<size_t>(bnd) * hidden;
      for (int k = 0; k < hidden; ++k) {
        const T hv = hprev_vec[k];
        T* gur = grad_u + static_cast<size_t>(k) * g3;
        const T* ur = uw + static_cast<size_t>(k) * g3;
        T acc = 0;
        for (int c = 0; c < g3; ++c) {
          gur[c] += hv * daup[c];
          acc += ur[c] * daup[c];
        }
        cy[k] += acc;
      }
    }
  }
  if (grad_h0)
    for (size_t i = 0; i < carry.size(); ++i) grad_h0[i] += carry[i];
}

// ------------------------------------------------------------------ MACs

// Multiply-accumulates only; elementwise ops, gates' pointwise math and
// normalizations are excluded. Reported per processed extent.
inline uint64_t conv_macs(const ConvSpec& spec, uint64_t out_positions) {
  return out_positions * static_cast<uint64_t>(spec.out_ch) *
         static_cast<uint64_t>(spec.in_per_group()) *
         static_cast<uint64_t>(spec.kernel);
}

inline uint64_t linear_macs(uint64_t positions, uint64_t in_dim, uint64_t out_dim) {
  return positions * in_dim * out_dim;
}

inline uint64_t gru_macs(uint64_t steps, uint64_t in_dim, uint64_t hidden) {
  return steps * 3 * (in_dim * hidden + hidden * hidden);
}

}  // namespace lszone
