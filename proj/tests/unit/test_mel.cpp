// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <vector>

#include "lszone/mel.hpp"
#include "test_util.hpp"

using namespace lszone;
namespace tu = lszone::testutil;

TEST_CASE("mel: 64x257 filterbank entries lie in [0,1], rows nonempty and unimodal") {
  auto fb = mel_filterbank<double>(257, 64, 16000);
  CHECK(fb.n_mel == 64);
  CHECK(fb.bins == 257);
  for (int m = 0; m < 64; ++m) {
    bool any = false;
    int sign_changes = 0;
    double prev_delta = 0;
    for (int k = 0; k < 257; ++k) {
      const double w = fb.row(m)[k];
      CHECK(w >= 0.0);
      CHECK(w <= 1.0);
      any = any || w > 0.0;
      if (k > 0) {
        const double delta = fb.row(m)[k] - fb.row(m)[k - 1];
        if (delta * prev_delta < -1e-15) ++sign_changes;
        if (delta != 0.0) prev_delta = delta;
      }
    }
    CHECK(any);
    CHECK(sign_changes <= 1);  // rise then fall
  }
}

TEST_CASE("mel: centers increase; first row support below last row support") {
  auto fb = mel_filterbank<double>(257, 64, 16000);
  for (int m = 1; m < 64; ++m) CHECK(fb.center_hz[m] > fb.center_hz[m - 1]);
  int hi0 = 0, lo63 = 257;
  for (int k = 0; k < 257; ++k) {
    if (fb.row(0)[k] > 0) hi0 = k;
    if (fb.row(63)[k] > 0) lo63 = std::min(lo63, k);
  }
  CHECK(hi0 < lo63);
}

TEST_CASE("mel: last triangle center matches the inverted top breakpoint") {
  auto fb = mel_filterbank<double>(257, 64, 16000);
  const double expected = mel_to_hz(hz_to_mel(8000.0) * 64.0 / 65.0);
  CHECK(fb.center_hz[63] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("mel: n_mel >= bins is rejected") {
  CHECK_THROWS_AS(mel_filterbank<double>(64, 64, 16000), std::invalid_argument);
}

TEST_CASE("apply_mel: zero spectrogram maps to zero features") {
  auto fb = mel_filterbank<double>(257, 64, 16000);
  ComplexSpectrogram<double> spec(6, 257, 4, StftConfig{});
  auto feat = apply_mel(spec, fb);
  CHECK(feat.n_mel == 64);
  CHECK(feat.frames == 4);
  CHECK(feat.channels == 6);
  for (double v : feat.v) CHECK(v == 0.0);
}

TEST_CASE("apply_mel: unit mass at one bin reproduces the filterbank column") {
  auto fb = mel_filterbank<double>(257, 64, 16000);
  ComplexSpectrogram<double> spec(1, 257, 1, StftConfig{});
  const int f0 = 100;
  spec.at(0, f0, 0) = {1.0, 0.0};
  auto feat = apply_mel(spec, fb);
  for (int m = 0; m < 64; ++m)
    CHECK(feat.at(m, 0, 0) == doctest::Approx(fb.row(m)[f0]).epsilon(1e-12));
}

TEST_CASE("apply_mel: linear in magnitude and channel-permutation equivariant") {
  auto fb = mel_filterbank<double>(257, 64, 16000);
  Rng rng(5);
  ComplexSpectrogram<double> a(3, 257, 2, StftConfig{});
  for (auto& c : a.data) c = {rng.uniform(-1, 1), rng.uniform(-1, 1)};

  auto doubled = a;
  for (auto& c : doubled.data) c *= 2.0;
  auto fa = apply_mel(a, fb);
  auto fd = apply_mel(doubled, fb);
  for (size_t i = 0; i < fa.v.size(); ++i)
    CHECK(fd.v[i] == doctest::Approx(2.0 * fa.v[i]).epsilon(1e-12));

  ComplexSpectrogram<double> p(3, 257, 2, StftConfig{});
  const int perm[3] = {2, 0, 1};
  for (int z = 0; z < 3; ++z)
    for (int f = 0; f < 257; ++f)
      for (int t = 0; t < 2; ++t) p.at(z, f, t) = a.at(perm[z], f, t);
  auto fp = apply_mel(p, fb);
  for (int z = 0; z < 3; ++z)
    for (int m = 0; m < 64; ++m)
      for (int t = 0; t < 2; ++t)
        CHECK(fp.at(m, t, z) == doctest::Approx(fa.at(m, t, perm[z])).epsilon(1e-12));
}

TEST_CASE("mel_inverse: forward of inverse of a constant vector stays within 20% per bin") {
  auto fb = mel_filterbank<double>(257, 64, 16000);
  auto inv = mel_inverse(fb);
  std::vector<double> mel_const(64, 1.0), mag(257, 0.0), rt(64, 0.0);
  mel_expand_frame(inv, 257, 64, mel_const.data(), mag.data());
  for (int m = 0; m < 64; ++m) {
    double acc = 0;
    for (int f = 0; f < 257; ++f) acc += fb.row(m)[f] * mag[f];
    rt[m] = acc;
    CHECK(std::fabs(rt[m] - 1.0) < 0.20);
  }
}

TEST_CASE("mel_inverse: zero mel vector expands to zero magnitudes; entries bounded") {
  auto fb = mel_filterbank<double>(257, 64, 16000);
  auto inv = mel_inverse(fb);
  std::vector<double> zero(64, 0.0), mag(257, 1.0);
  mel_expand_frame(inv, 257, 64, zero.data(), mag.data());
  for (double v : mag) CHECK(v == 0.0);
  for (double v : inv) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);  // unit-peak rows with row_sum >= peak
  }
}

TEST_CASE("mel_inverse: negative mel entries are clamped before expansion") {
  auto fb = mel_filterbank<double>(257, 64, 16000);
  auto inv = mel_inverse(fb);
  std::vector<double> neg(64, -3.0), mag(257, 1.0);
  mel_expand_frame(inv, 257, 64, neg.data(), mag.data());
  for (double v : mag) CHECK(v == 0.0);
}
