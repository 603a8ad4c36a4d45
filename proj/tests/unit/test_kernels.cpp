// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <vector>

#include "lszone/nn/kernels.hpp"
#include "lszone/nn/params.hpp"
#include "test_util.hpp"

using namespace lszone;
namespace tu = lszone::testutil;

namespace {

std::vector<double> random_vec(size_t n, uint64_t seed, double amp = 1.0) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-amp, amp);
  return v;
}

double dot_loss(const Tensor3<double>& y, const Tensor3<double>& probe) {
  double acc = 0;
  for (size_t i = 0; i < y.v.size(); ++i) acc += y.v[i] * probe.v[i];
  return acc;
}

}  // namespace

TEST_CASE("conv1d: 1x1 identity kernel passes input through") {
  ConvSpec spec{.in_ch = 3, .out_ch = 3, .kernel = 1, .groups = 1};
  std::vector<double> w(3 * 3, 0.0);
  for (int c = 0; c < 3; ++c) w[c * 3 + c] = 1.0;  // [k=0][ic][oc]
  Tensor3<double> x(3, 5, 4), y;
  tu::fill_random(x, 42);
  conv1d_forward<double>(x, spec, w.data(), nullptr, y);
  for (size_t i = 0; i < x.v.size(); ++i) CHECK(y.v[i] == x.v[i]);
}

TEST_CASE("conv1d: box kernel over an impulse matches the direct sum") {
  ConvSpec spec{.in_ch = 1, .out_ch = 1, .kernel = 3, .groups = 1};
  std::vector<double> w = {1.0, 1.0, 1.0};
  Tensor3<double> x(1, 8, 1), y;
  x.at(0, 1, 0) = 1.0;  // (0,1,0,0,...)
  conv1d_forward<double>(x, spec, w.data(), nullptr, y);
  const double expected[8] = {1, 1, 1, 0, 0, 0, 0, 0};
  for (int b = 0; b < 8; ++b) CHECK(y.at(0, b, 0) == expected[b]);
}

TEST_CASE("conv1d: groups keep channel blocks independent") {
  ConvSpec spec{.in_ch = 4, .out_ch = 4, .kernel = 3, .groups = 2};
  auto w = random_vec(3 * 2 * 4, 9);
  Tensor3<double> x(4, 6, 2), y_full, y_zeroed;
  tu::fill_random(x, 10);
  conv1d_forward<double>(x, spec, w.data(), nullptr, y_full);

  auto xz = x;
  for (int b = 0; b < 6; ++b)
    for (int t = 0; t < 2; ++t) {
      xz.at(0, b, t) = 0.0;
      xz.at(1, b, t) = 0.0;
    }
  conv1d_forward<double>(xz, spec, w.data(), nullptr, y_zeroed);
  for (int b = 0; b < 6; ++b)
    for (int t = 0; t < 2; ++t) {
      CHECK(y_zeroed.at(2, b, t) == y_full.at(2, b, t));
      CHECK(y_zeroed.at(3, b, t) == y_full.at(3, b, t));
    }
}

TEST_CASE("conv1d: grouped conv equals concatenated per-group convs") {
  ConvSpec spec{.in_ch = 6, .out_ch = 4, .kernel = 3, .groups = 2};
  auto w = random_vec(3 * 3 * 4, 77);
  Tensor3<double> x(6, 7, 3), y;
  tu::fill_random(x, 78);
  conv1d_forward<double>(x, spec, w.data(), nullptr, y);

  for (int g = 0; g < 2; ++g) {
    ConvSpec sub{.in_ch = 3, .out_ch = 2, .kernel = 3, .groups = 1};
    // slice weights for this group: w[j][ic][oc] with oc in [2g, 2g+2)
    std::vector<double> wg(3 * 3 * 2);
    for (int j = 0; j < 3; ++j)
      for (int ic = 0; ic < 3; ++ic)
        for (int oc = 0; oc < 2; ++oc)
          wg[(j * 3 + ic) * 2 + oc] = w[(j * 3 + ic) * 4 + g * 2 + oc];
    Tensor3<double> xg(3, 7, 3), yg;
    for (int c = 0; c < 3; ++c)
      for (int b = 0; b < 7; ++b)
        for (int t = 0; t < 3; ++t) xg.at(c, b, t) = x.at(g * 3 + c, b, t);
    conv1d_forward<double>(xg, sub, wg.data(), nullptr, yg);
    for (int c = 0; c < 2; ++c)
      for (int b = 0; b < 7; ++b)
        for (int t = 0; t < 3; ++t)
          CHECK(yg.at(c, b, t) == doctest::Approx(y.at(g * 2 + c, b, t)).epsilon(1e-12));
  }
}

TEST_CASE("conv1d: bad group divisibility is a config error") {
  ConvSpec spec{.in_ch = 3, .out_ch = 4, .kernel = 3, .groups = 2};
  Tensor3<double> x(3, 4, 1), y;
  std::vector<double> w(64, 0.0);
  CHECK_THROWS_AS(conv1d_forward<double>(x, spec, w.data(), nullptr, y), std::invalid_argument);
}

TEST_CASE("conv1d: causal time-axis output ignores future frames") {
  ConvSpec spec{.in_ch = 2, .out_ch = 2, .kernel = 3, .groups = 1,
                .axis = ConvAxis::Time, .pad = ConvPad::Causal};
  auto w = random_vec(3 * 2 * 2, 5);
  Tensor3<double> x(2, 3, 10), y0, y1;
  tu::fill_random(x, 6);
  conv1d_forward<double>(x, spec, w.data(), nullptr, y0);
  auto xp = x;
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 3; ++b)
      for (int t = 6; t < 10; ++t) xp.at(c, b, t) += 3.0;
  conv1d_forward<double>(xp, spec, w.data(), nullptr, y1);
  for (int c = 0; c < 2; ++c)
    for (int b = 0; b < 3; ++b)
      for (int t = 0; t < 6; ++t) CHECK(y0.at(c, b, t) == y1.at(c, b, t));
}

TEST_CASE("conv1d: gradients match central finite differences") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    Rng shape_rng(seed);
    const int groups = 1 + static_cast<int>(shape_rng.next_below(2));
    ConvSpec spec{.in_ch = 4, .out_ch = 8, .kernel = 3,
                  .groups = groups,
                  .axis = seed % 2 ? ConvAxis::Time : ConvAxis::Band,
                  .pad = seed % 3 == 2 ? ConvPad::Causal : ConvPad::Same};
    Tensor3<double> x(4, 8, 6);
    tu::fill_random(x, seed * 3 + 1);
    auto w = random_vec(spec.kernel * spec.in_per_group() * spec.out_ch, seed * 3 + 2, 0.5);
    auto b = random_vec(spec.out_ch, seed * 3 + 3, 0.2);
    Tensor3<double> probe(spec.out_ch, 8, 6);
    tu::fill_random(probe, seed * 3 + 4);

    auto loss = [&] {
      Tensor3<double> y;
      conv1d_forward<double>(x, spec, w.data(), b.data(), y);
      return dot_loss(y, probe);
    };

    Tensor3<double> y;
    conv1d_forward<double>(x, spec, w.data(), b.data(), y);
    Tensor3<double> gx;
    std::vector<double> gw(w.size(), 0.0), gb(b.size(), 0.0);
    conv1d_backward<double>(x, spec, w.data(), probe, &gx, gw.data(), gb.data());

    Rng pick(seed + 99);
    for (int trial = 0; trial < 6; ++trial) {
      size_t wi = pick.next_below(w.size());
      CHECK(tu::grad_rel_err(gw[wi], tu::central_diff(loss, w[wi])) < 1e-6);
      size_t xi = pick.next_below(x.v.size());
      CHECK(tu::grad_rel_err(gx.v[xi], tu::central_diff(loss, x.v[xi])) < 1e-6);
      size_t bi = pick.next_below(b.size());
      CHECK(tu::grad_rel_err(gb[bi], tu::central_diff(loss, b[bi])) < 1e-6);
    }
  }
}

TEST_CASE("conv1d: zero upstream gradient produces zero gradients; backward is linear") {
  ConvSpec spec{.in_ch = 2, .out_ch = 2, .kernel = 3, .groups = 1};
  Tensor3<double> x(2, 5, 3);
  tu::fill_random(x, 8);
  auto w = random_vec(3 * 2 * 2, 9);

  Tensor3<double> zero_go(2, 5, 3), gx;
  std::vector<double> gw(w.size(), 0.0), gb(2, 0.0);
  conv1d_backward<double>(x, spec, w.data(), zero_go, &gx, gw.data(), gb.data());
  for (double v : gw) CHECK(v == 0.0);
  for (double v : gx.v) CHECK(v == 0.0);

  Tensor3<double> go(2, 5, 3);
  tu::fill_random(go, 10);
  Tensor3<double> gx1, gx2;
  std::vector<double> gw1(w.size(), 0.0), gw2(w.size(), 0.0);
  conv1d_backward<double>(x, spec, w.data(), go, &gx1, gw1.data(), nullptr);
  auto go2 = go;
  for (auto& v : go2.v) v *= 2.0;
  conv1d_backward<double>(x, spec, w.data(), go2, &gx2, gw2.data(), nullptr);
  for (size_t i = 0; i < gx1.v.size(); ++i)
    CHECK(gx2.v[i] == doctest::Approx(2.0 * gx1.v[i]).epsilon(1e-12));
  for (size_t i = 0; i < gw1.size(); ++i)
    CHECK(gw2[i] == doctest::Approx(2.0 * gw1[i]).epsilon(1e-12));
}

TEST_CASE("gru: all-zero parameters and zero state give zero output") {
  const int in = 4, hidden = 6, B = 3, T = 5;
  Tensor3<double> x(in, B, T), y;
  tu::fill_random(x, 12);
  std::vector<double> w(in * 3 * hidden, 0.0), u(hidden * 3 * hidden, 0.0),
      b(3 * hidden, 0.0), h0(B * hidden, 0.0), hT;
  gru_forward<double>(x, h0, hidden, w.data(), u.data(), b.data(), y, hT, nullptr);
  for (double v : y.v) CHECK(v == 0.0);
  for (double v : hT) CHECK(v == 0.0);
}

TEST_CASE("gru: stepwise execution with carried state equals one batched call") {
  const int in = 5, hidden = 7, B = 2, T = 9;
  Tensor3<double> x(in, B, T), y_batch;
  tu::fill_random(x, 20);
  auto w = random_vec(in * 3 * hidden, 21, 0.4);
  auto u = random_vec(hidden * 3 * hidden, 22, 0.4);
  auto b = random_vec(3 * hidden, 23, 0.2);
  std::vector<double> h0(B * hidden, 0.0), hT;
  gru_forward<double>(x, h0, hidden, w.data(), u.data(), b.data(), y_batch, hT, nullptr);

  std::vector<double> h(B * hidden, 0.0), h_next;
  for (int t = 0; t < T; ++t) {
    Tensor3<double> xt(in, B, 1), yt;
    for (int c = 0; c < in; ++c)
      for (int bb = 0; bb < B; ++bb) xt.at(c, bb, 0) = x.at(c, bb, t);
    gru_forward<double>(xt, h, hidden, w.data(), u.data(), b.data(), yt, h_next, nullptr);
    h = h_next;
    for (int c = 0; c < hidden; ++c)
      for (int bb = 0; bb < B; ++bb)
        CHECK(yt.at(c, bb, 0) == doctest::Approx(y_batch.at(c, bb, t)).epsilon(1e-12));
  }
  for (size_t i = 0; i < hT.size(); ++i) CHECK(h[i] == doctest::Approx(hT[i]));
}

TEST_CASE("gru: weight gradients match central finite differences") {
  const int in = 4, hidden = 5, B = 2, T = 6;
  Tensor3<double> x(in, B, T);
  tu::fill_random(x, 31);
  auto w = random_vec(in * 3 * hidden, 32, 0.4);
  auto u = random_vec(hidden * 3 * hidden, 33, 0.4);
  auto b = random_vec(3 * hidden, 34, 0.2);
  auto h0 = random_vec(B * hidden, 35, 0.3);
  Tensor3<double> probe(hidden, B, T);
  tu::fill_random(probe, 36);

  auto loss = [&] {
    Tensor3<double> y;
    std::vector<double> hT;
    gru_forward<double>(x, h0, hidden, w.data(), u.data(), b.data(), y, hT, nullptr);
    return dot_loss(y, probe);
  };

  Tensor3<double> y;
  std::vector<double> hT;
  GruCache<double> cache;
  gru_forward<double>(x, h0, hidden, w.data(), u.data(), b.data(), y, hT, &cache);
  Tensor3<double> gx;
  std::vector<double> gw(w.size(), 0.0), gu(u.size(), 0.0), gb(b.size(), 0.0),
      gh0(h0.size(), 0.0);
  gru_backward<double>(x, h0, hidden, w.data(), u.data(), y, cache, probe, nullptr, &gx,
               gw.data(), gu.data(), gb.data(), gh0.data());

  Rng pick(40);
  for (int trial = 0; trial < 8; ++trial) {
    size_t wi = pick.next_below(w.size());
    CHECK(tu::grad_rel_err(gw[wi], tu::central_diff(loss, w[wi])) < 1e-6);
    size_t ui = pick.next_below(u.size());
    CHECK(tu::grad_rel_err(gu[ui], tu::central_diff(loss, u[ui])) < 1e-6);
    size_t bi = pick.next_below(b.size());
    CHECK(tu::grad_rel_err(gb[bi], tu::central_diff(loss, b[bi])) < 1e-6);
    size_t xi = pick.next_below(x.v.size());
    CHECK(tu::grad_rel_err(gx.v[xi], tu::central_diff(loss, x.v[xi])) < 1e-6);
    size_t hi = pick.next_below(h0.size());
    CHECK(tu::grad_rel_err(gh0[hi], tu::central_diff(loss, h0[hi])) < 1e-6);
  }
}

TEST_CASE("layernorm: constant input yields the bias; stats normalize") {
  const int dim = 8, n = 4;
  std::vector<double> x(n * dim, 3.7), gain(dim, 1.3), bias(dim);
  for (int c = 0; c < dim; ++c) bias[c] = 0.1 * c;
  std::vector<double> y(n * dim);
  layernorm_forward<double>(x.data(), n, dim, gain.data(), bias.data(), y.data(),
                    nullptr);
  for (int p = 0; p < n; ++p)
    for (int c = 0; c < dim; ++c)
      CHECK(y[p * dim + c] == doctest::Approx(bias[c]).epsilon(1e-9));

  auto xr = random_vec(n * dim, 50);
  layernorm_forward<double>(xr.data(), n, dim, gain.data(), bias.data(), y.data(),
                    nullptr);
  for (int p = 0; p < n; ++p) {
    double mean = 0, var = 0, bias_mean = 0;
    for (int c = 0; c < dim; ++c) {
      mean += y[p * dim + c];
      bias_mean += bias[c];
    }
    mean /= dim;
    bias_mean /= dim;
    CHECK(mean == doctest::Approx(bias_mean).epsilon(1e-6));
    for (int c = 0; c < dim; ++c) {
      const double d = y[p * dim + c] - bias[c];
      var += d * d;
    }
    var /= dim;
    CHECK(var == doctest::Approx(1.3 * 1.3).epsilon(0.01));
  }
}

TEST_CASE("layernorm: gradients match central finite differences") {
  const int dim = 6, n = 3;
  auto x = random_vec(n * dim, 60);
  auto gain = random_vec(dim, 61, 0.8);
  auto bias = random_vec(dim, 62, 0.3);
  auto probe = random_vec(n * dim, 63);

  auto loss = [&] {
    std::vector<double> y(n * dim);
    layernorm_forward<double>(x.data(), n, dim, gain.data(), bias.data(), y.data(),
                      nullptr);
    double acc = 0;
    for (size_t i = 0; i < y.size(); ++i) acc += y[i] * probe[i];
    return acc;
  };

  std::vector<double> y(n * dim);
  LayerNormCache<double> cache;
  layernorm_forward<double>(x.data(), n, dim, gain.data(), bias.data(), y.data(), &cache);
  std::vector<double> gx(n * dim, 0.0), gg(dim, 0.0), gb(dim, 0.0);
  layernorm_backward<double>(cache, n, dim, gain.data(), probe.data(), gx.data(), gg.data(),
                     gb.data());

  Rng pick(64);
  for (int trial = 0; trial < 8; ++trial) {
    size_t xi = pick.next_below(x.size());
    CHECK(tu::grad_rel_err(gx[xi], tu::central_diff(loss, x[xi])) < 1e-6);
    size_t gi = pick.next_below(gain.size());
    CHECK(tu::grad_rel_err(gg[gi], tu::central_diff(loss, gain[gi])) < 1e-6);
    size_t bi = pick.next_below(bias.size());
    CHECK(tu::grad_rel_err(gb[bi], tu::central_diff(loss, bias[bi])) < 1e-6);
  }
}

TEST_CASE("linear and activations: identity map, sigmoid(0), silu gradient") {
  const int d = 5;
  std::vector<double> w(d * d, 0.0);
  for (int i = 0; i < d; ++i) w[i * d + i] = 1.0;
  auto x = random_vec(3 * d, 70);
  std::vector<double> y(3 * d);
  linear_forward<double>(x.data(), 3, d, d, w.data(), nullptr, y.data());
  for (size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);

  CHECK(sigmoid(0.0) == 0.5);

  auto xs = random_vec(16, 71, 2.0);
  auto probe = random_vec(16, 72);
  auto loss = [&] {
    std::vector<double> ys(16);
    silu_forward<double>(xs.data(), 16, ys.data());
    double acc = 0;
    for (int i = 0; i < 16; ++i) acc += ys[i] * probe[i];
    return acc;
  };
  std::vector<double> gx(16, 0.0);
  silu_backward<double>(xs.data(), 16, probe.data(), gx.data());
  for (int i = 0; i < 16; i += 3)
    CHECK(tu::grad_rel_err(gx[i], tu::central_diff(loss, xs[i])) < 1e-6);
}

TEST_CASE("linear: gradients match central finite differences") {
  const int in = 4, out = 3, n = 5;
  auto x = random_vec(n * in, 80);
  auto w = random_vec(in * out, 81);
  auto b = random_vec(out, 82);
  auto probe = random_vec(n * out, 83);

  auto loss = [&] {
    std::vector<double> y(n * out);
    linear_forward<double>(x.data(), n, in, out, w.data(), b.data(), y.data());
    double acc = 0;
    for (size_t i = 0; i < y.size(); ++i) acc += y[i] * probe[i];
    return acc;
  };

  std::vector<double> gx(n * in, 0.0), gw(in * out, 0.0), gb(out, 0.0);
  linear_backward<double>(x.data(), n, in, out, w.data(), probe.data(), gx.data(), gw.data(),
                  gb.data());
  Rng pick(84);
  for (int trial = 0; trial < 8; ++trial) {
    size_t wi = pick.next_below(w.size());
    CHECK(tu::grad_rel_err(gw[wi], tu::central_diff(loss, w[wi])) < 1e-6);
    size_t xi = pick.next_below(x.size());
    CHECK(tu::grad_rel_err(gx[xi], tu::central_diff(loss, x[xi])) < 1e-6);
  }
}

TEST_CASE("macs: counting convention fixed points") {
  // linear 144 -> 72 over 64 positions
  CHECK(linear_macs(64, 144, 72) == 663552);
  // one position: in_dim x out_dim
  CHECK(linear_macs(1, 144, 72) == 10368);
  // depthwise conv, 72 channels, k=5, 64 positions
  ConvSpec dw{.in_ch = 72, .out_ch = 72, .kernel = 5, .groups = 72};
  CHECK(conv_macs(dw, 64) == 23040);
  // GRU 72 -> 144, one step
  CHECK(gru_macs(1, 72, 144) == 93312);
}

TEST_CASE("param store: identical seeds give bit-identical parameters") {
  ParamStore<double> a(42), b(42);
  a.add("w1", {16, 9}, 9);
  a.add("b1", {16}, 0);
  a.add("g1", {16}, -1);
  b.add("w1", {16, 9}, 9);
  b.add("b1", {16}, 0);
  b.add("g1", {16}, -1);
  for (size_t e = 0; e < a.size(); ++e)
    for (size_t i = 0; i < a[static_cast<int>(e)].count(); ++i)
      CHECK(a[static_cast<int>(e)].value[i] == b[static_cast<int>(e)].value[i]);
  CHECK(a.param_count() == 16 * 9 + 16 + 16);
  // bounds follow fan-in
  for (double v : a[0].value) CHECK(std::fabs(v) <= 1.0 / 3.0);
  for (double v : a[1].value) CHECK(v == 0.0);
  for (double v : a[2].value) CHECK(v == 1.0);
}

TEST_CASE("adam: a zero-gradient step leaves parameters unchanged") {
  ParamStore<double> s(1);
  s.add("w", {8}, 4);
  auto before = s[0].value;
  Adam<double> opt;
  s.zero_grad();
  opt.step(s, 1e-3);
  for (size_t i = 0; i < before.size(); ++i) CHECK(s[0].value[i] == before[i]);
}
