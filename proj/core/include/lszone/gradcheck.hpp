// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Central-finite-difference verification of every hand-written backward
// pass, in double precision. The numeric side never touches the analytic
// gradient code paths it checks.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lszone/model.hpp"
#include "lszone/train.hpp"

namespace lszone {

struct GradCheckResult {
  std::string name;
  double max_rel_err = 0.0;
  int checked = 0;
  double tolerance = 1e-6;
  bool pass() const { return max_rel_err < tolerance; }
};

namespace gradcheck_detail {

inline double rel_err(double analytic, double numeric) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / denom;
}

inline double central_diff(const std::function<double()>& f, double& theta) {
  const double orig = theta;
  const double h = 1e-5 * std::max(1.0, std::fabs(orig));
  theta = orig + h;
  const double fp = f();
  theta = orig - h;
  const double fm = f();
  theta = orig;
  return (fp - fm) / (2.0 * h);
}

inline void fill_tensor(Tensor3<double>& t, uint64_t seed, double amp = 1.0) {
  Rng rng(seed);
  for (auto& v : t.v) v = rng.uniform(-amp, amp);
}

}  // namespace gradcheck_detail

// conv (grouped + causal), gru, layernorm, linear, silu
inline std::vector<GradCheckResult> gradcheck_primitives(uint64_t seed) {
  using namespace gradcheck_detail;
  std::vector<GradCheckResult> out;

  {  // grouped band conv and causal time conv
    for (int variant = 0; variant < 2; ++variant) {
      ConvSpec spec{.in_ch = 4, .out_ch = 6, .kernel = 3,
                    .groups = variant == 0 ? 2 : 1,
                    .axis = variant == 0 ? ConvAxis::Band : ConvAxis::Time,
                    .pad = variant == 0 ? ConvPad::Same : ConvPad::Causal};
      Tensor3<double> x(4, 8, 6), probe(6, 8, 6);
      fill_tensor(x, seed + 1 + variant);
      fill_tensor(probe, seed + 2 + variant);
      std::vector<double> w(static_cast<size_t>(spec.kernel) *
                            spec.in_per_group() * spec.out_ch);
      std::vector<double> b(spec.out_ch);
      Rng rng(seed + 3 + variant);
      for (auto& v : w) v = rng.uniform(-0.5, 0.5);
      for (auto& v : b) v = rng.uniform(-0.2, 0.2);

      auto loss = [&] {
        Tensor3<double> y;
        conv1d_forward(x, spec, w.data(), b.data(), y);
        double acc = 0;
        for (size_t i = 0; i < y.v.size(); ++i) acc += y.v[i] * probe.v[i];
        return acc;
      };
      Tensor3<double> gx;
      std::vector<double> gw(w.size(), 0.0), gb(b.size(), 0.0);
      conv1d_backward(x, spec, w.data(), probe, &gx, gw.data(), gb.data());

      GradCheckResult r;
      r.name = variant == 0 ? "conv1d[grouped,band]" : "conv1d[causal,time]";
      Rng pick(seed + 7 + variant);
      for (int k = 0; k < 10; ++k) {
        size_t wi = pick.next_below(w.size());
        r.max_rel_err = std::max(r.max_rel_err,
                                 rel_err(gw[wi], central_diff(loss, w[wi])));
        size_t xi = pick.next_below(x.v.size());
        r.max_rel_err = std::max(r.max_rel_err,
                                 rel_err(gx.v[xi], central_diff(loss, x.v[xi])));
        r.checked += 2;
      }
      out.push_back(r);
    }
  }

  {  // gru
    const int in = 4, hidden = 5, B = 2, Tn = 6;
    Tensor3<double> x(in, B, Tn), probe(hidden, B, Tn);
    fill_tensor(x, seed + 11);
    fill_tensor(probe, seed + 12);
    Rng rng(seed + 13);
    std::vector<double> w(in * 3 * hidden), u(hidden * 3 * hidden), b(3 * hidden),
        h0(B * hidden);
    for (auto& v : w) v = rng.uniform(-0.4, 0.4);
    for (auto& v : u) v = rng.uniform(-0.4, 0.4);
    for (auto& v : b) v = rng.uniform(-0.2, 0.2);
    for (auto& v : h0) v = rng.uniform(-0.3, 0.3);

    auto loss = [&] {
      Tensor3<double> y;
      std::vector<double> hT;
      gru_forward(x, h0, hidden, w.data(), u.data(), b.data(), y, hT, nullptr);
      double acc = 0;
      for (size_t i = 0; i < y.v.size(); ++i) acc += y.v[i] * probe.v[i];
      return acc;
    };
    Tensor3<double> y, gx;
    std::vector<double> hT;
    GruCache<double> cache;
    gru_forward(x, h0, hidden, w.data(), u.data(), b.data(), y, hT, &cache);
    std::vector<double> gw(w.size(), 0.0), gu(u.size(), 0.0), gb(b.size(), 0.0);
    gru_backward(x, h0, hidden, w.data(), u.data(), y, cache, probe,
                 static_cast<const double*>(nullptr), &gx, gw.data(), gu.data(),
                 gb.data(), static_cast<double*>(nullptr));

    GradCheckResult r;
    r.name = "gru";
    Rng pick(seed + 14);
    for (int k = 0; k < 12; ++k) {
      size_t wi = pick.next_below(w.size());
      r.max_rel_err = std::max(r.max_rel_err, rel_err(gw[wi], central_diff(loss, w[wi])));
      size_t ui = pick.next_below(u.size());
      r.max_rel_err = std::max(r.max_rel_err, rel_err(gu[ui], central_diff(loss, u[ui])));
      size_t bi = pick.next_below(b.size());
      r.max_rel_err = std::max(r.max_rel_err, rel_err(gb[bi], central_diff(loss, b[bi])));
      r.checked += 3;
    }
    out.push_back(r);
  }

  {  // layernorm
    const int dim = 6, n = 4;
    Rng rng(seed + 21);
    std::vector<double> x(n * dim), gain(dim), bias(dim), probe(n * dim);
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (auto& v : gain) v = rng.uniform(0.5, 1.5);
    for (auto& v : bias) v = rng.uniform(-0.3, 0.3);
    for (auto& v : probe) v = rng.uniform(-1, 1);

    auto loss = [&] {
      std::vector<double> y(n * dim);
      layernorm_forward<double>(x.data(), n, dim, gain.data(), bias.data(),
                                y.data(), nullptr);
      double acc = 0;
      for (size_t i = 0; i < y.size(); ++i) acc += y[i] * probe[i];
      return acc;
    };
    std::vector<double> y(n * dim);
    LayerNormCache<double> cache;
    layernorm_forward(x.data(), n, dim, gain.data(), bias.data(), y.data(), &cache);
    std::vector<double> gx(n * dim, 0.0), gg(dim, 0.0), gb(dim, 0.0);
    layernorm_backward(cache, n, dim, gain.data(), probe.data(), gx.data(),
                       gg.data(), gb.data());

    GradCheckResult r;
    r.name = "layernorm";
    Rng pick(seed + 22);
    for (int k = 0; k < 10; ++k) {
      size_t xi = pick.next_below(x.size());
      r.max_rel_err = std::max(r.max_rel_err, rel_err(gx[xi], central_diff(loss, x[xi])));
      size_t gi = pick.next_below(gain.size());
      r.max_rel_err = std::max(r.max_rel_err, rel_err(gg[gi], central_diff(loss, gain[gi])));
      r.checked += 2;
    }
    out.push_back(r);
  }

  {  // linear + silu composite
    const int in = 5, outn = 4, n = 3;
    Rng rng(seed + 31);
    std::vector<double> x(n * in), w(in * outn), b(outn), probe(n * outn);
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (auto& v : w) v = rng.uniform(-0.6, 0.6);
    for (auto& v : b) v = rng.uniform(-0.2, 0.2);
    for (auto& v : probe) v = rng.uniform(-1, 1);

    auto loss = [&] {
      std::vector<double> y(n * outn), s(n * outn);
      linear_forward(x.data(), n, in, outn, w.data(), b.data(), y.data());
      silu_forward(y.data(), y.size(), s.data());
      double acc = 0;
      for (size_t i = 0; i < s.size(); ++i) acc += s[i] * probe[i];
      return acc;
    };
    std::vector<double> y(n * outn);
    linear_forward(x.data(), n, in, outn, w.data(), b.data(), y.data());
    std::vector<double> dy(n * outn, 0.0);
    silu_backward(y.data(), y.size(), probe.data(), dy.data());
    std::vector<double> gx(n * in, 0.0), gw(in * outn, 0.0), gb(outn, 0.0);
    linear_backward(x.data(), n, in, outn, w.data(), dy.data(), gx.data(),
                    gw.data(), gb.data());

    GradCheckResult r;
    r.name = "linear+silu";
    Rng pick(seed + 32);
    for (int k = 0; k < 10; ++k) {
      size_t wi = pick.next_below(w.size());
      r.max_rel_err = std::max(r.max_rel_err, rel_err(gw[wi], central_diff(loss, w[wi])));
      size_t xi = pick.next_below(x.size());
      r.max_rel_err = std::max(r.max_rel_err, rel_err(gx[xi], central_diff(loss, x[xi])));
      r.checked += 2;
    }
    out.push_back(r);
  }

  return out;
}

// End-to-end: complex-MSE loss of a tiny model; >= `samples` random
// parameters across every tensor vs central differences.
inline GradCheckResult gradcheck_model(uint64_t seed, int samples = 24) {
  using namespace gradcheck_detail;
  ModelConfig cfg;
  cfg.zones = 2;
  cfg.n_mel = 8;
  cfg.hidden = 16;
  cfg.hidden_units = 32;
  cfg.blocks = 1;
  LSZoneModel<double> model(cfg, derive_seed(seed, 0xAB));

  const int F = cfg.stft.bins(), Tn = 6;
  ComplexSpectrogram<double> mix(cfg.zones, F, Tn, cfg.stft),
      target(cfg.zones, F, Tn, cfg.stft);
  Rng rng(derive_seed(seed, 0xCD));
  for (auto& c : mix.data) c = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  for (auto& c : target.data) c = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};

  auto loss = [&] { return loss_mse_complex(model, mix, target, 0.0); };

  model.store().zero_grad();
  loss_mse_complex(model, mix, target, 1.0);

  GradCheckResult r;
  r.name = "model[Z=2,n_mel=8,H=16,M=1]";
  r.tolerance = 1e-5;
  auto& entries = model.store().entries();
  Rng pick(derive_seed(seed, 0xEF));
  for (int k = 0; k < samples; ++k) {
    auto& e = entries[pick.next_below(entries.size())];
    const size_t i = pick.next_below(e.count());
    const double analytic = e.grad[i];
    const double numeric = central_diff(loss, e.value[i]);
    r.max_rel_err = std::max(r.max_rel_err, rel_err(analytic, numeric));
    r.checked += 1;
  }
  return r;
}

}  // namespace lszone
