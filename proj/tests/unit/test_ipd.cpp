// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <vector>

#include "lszone/ipd.hpp"
#include "lszone/stft.hpp"
#include "test_util.hpp"

using namespace lszone;
namespace tu = lszone::testutil;

TEST_CASE("ipd: duplicate channels give zero phase difference") {
  auto wave = tu::random_wave(2048, 21);
  auto spec = stft<double>({wave, wave}, StftConfig{});
  auto ipd = compute_ipd(spec);
  for (double v : ipd.v) CHECK(v == 0.0);
}

TEST_CASE("ipd: six channels give shape (6, 5, 257, T)") {
  std::vector<std::vector<double>> wave;
  for (int z = 0; z < 6; ++z) wave.push_back(tu::random_wave(1024, 30 + z));
  auto ipd = compute_ipd(stft<double>(wave, StftConfig{}));
  CHECK(ipd.zones == 6);
  CHECK(ipd.pairs == 5);
  CHECK(ipd.bins == 257);
  CHECK(ipd.frames == 3);
  CHECK(ipd.v.size() == 6u * 5u * 257u * 3u);
}

TEST_CASE("ipd: a 4-sample delay shows up as 2*pi*k*4/512 at the tone bin") {
  const double freq = 1000.0;  // exactly bin 32
  const int delay = 4;
  std::vector<double> a(4096), b(4096);
  for (size_t i = 0; i < a.size(); ++i) {
    a[i] = std::sin(2.0 * M_PI * freq * static_cast<double>(i) / 16000.0);
    b[i] = std::sin(2.0 * M_PI * freq * (static_cast<double>(i) - delay) / 16000.0);
  }
  auto spec = stft<double>({a, b}, StftConfig{});
  auto ipd = compute_ipd(spec);

  const int k = 32;
  const double expected = wrap_angle(2.0 * M_PI * k * delay / 512.0);
  for (int t = 1; t + 1 < ipd.frames; ++t) {
    // pair index 0 of zone 0 is (0,1)
    CHECK(ipd.at(0, 0, k, t) == doctest::Approx(expected).epsilon(1e-6));
    // direct phase computation oracle
    const auto s0 = spec.at(0, k, t);
    const auto s1 = spec.at(1, k, t);
    const double direct = wrap_angle(std::atan2(s0.imag(), s0.real()) -
                                     std::atan2(s1.imag(), s1.real()));
    CHECK(ipd.at(0, 0, k, t) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("ipd: fewer than two channels is rejected") {
  auto spec = stft<double>({tu::random_wave(600, 2)}, StftConfig{});
  CHECK_THROWS_WITH_AS(compute_ipd(spec), "IPD requires >=2 channels",
                       std::invalid_argument);
}

TEST_CASE("ipd: antisymmetry and wrap range hold for random inputs") {
  for (uint64_t seed = 0; seed < 4; ++seed) {
    std::vector<std::vector<double>> wave;
    const int zones = 3 + static_cast<int>(seed % 3);
    for (int z = 0; z < zones; ++z)
      wave.push_back(tu::random_wave(1500, seed * 100 + z));
    auto ipd = compute_ipd(stft<double>(wave, StftConfig{}));

    for (double v : ipd.v) {
      CHECK(v > -M_PI - 1e-15);
      CHECK(v <= M_PI + 1e-15);
    }
    // pair index of `other` within zone z's ascending list
    auto pair_index = [&](int z, int other) { return other < z ? other : other - 1; };
    for (int z = 0; z < zones; ++z)
      for (int other = 0; other < zones; ++other) {
        if (other == z) continue;
        for (int f = 0; f < ipd.bins; f += 17)
          for (int t = 0; t < ipd.frames; ++t) {
            const double fwd = ipd.at(z, pair_index(z, other), f, t);
            const double rev = ipd.at(other, pair_index(other, z), f, t);
            CHECK(fwd == doctest::Approx(wrap_angle(-rev)).epsilon(1e-12));
          }
      }
  }
}

TEST_CASE("wrap_angle: boundary values land in (-pi, pi]") {
  CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(3.0 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(2.0 * M_PI) == doctest::Approx(0.0).epsilon(1e-12));
}
