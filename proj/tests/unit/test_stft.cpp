// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "lszone/stft.hpp"
#include "test_util.hpp"

using namespace lszone;
namespace tu = lszone::testutil;

namespace {

StftConfig cfg16k() { return StftConfig{}; }

// Independent weighted overlap-add synthesis, written from the definition.
std::vector<double> wola_oracle(const ComplexSpectrogram<double>& spec, int ch,
                                const StftConfig& cfg) {
  const auto win = periodic_hann<double>(cfg.win_len);
  const size_t out_len = static_cast<size_t>(spec.frames - 1) * cfg.hop + cfg.win_len;
  std::vector<double> num(out_len, 0.0), den(out_len, 0.0);
  for (int t = 0; t < spec.frames; ++t) {
    // inverse DFT of the conjugate-symmetric extension, directly
    for (int i = 0; i < cfg.fft_size; ++i) {
      std::complex<double> acc = 0;
      for (int f = 0; f < cfg.fft_size; ++f) {
        std::complex<double> bin =
            f <= cfg.fft_size / 2 ? spec.at(ch, f, t)
                                  : std::conj(spec.at(ch, cfg.fft_size - f, t));
        const double a = 2.0 * M_PI * f * i / cfg.fft_size;
        acc += bin * std::complex<double>(std::cos(a), std::sin(a));
      }
      const double sample = acc.real() / cfg.fft_size;
      if (i < cfg.win_len) {
        num[t * cfg.hop + i] += win[i] * sample;
        den[t * cfg.hop + i] += win[i] * win[i];
      }
    }
  }
  std::vector<double> out(out_len, 0.0);
  for (size_t i = 0; i < out_len; ++i)
    out[i] = den[i] < 1e-8 ? 0.0 : num[i] / den[i];
  return out;
}

}  // namespace

TEST_CASE("stft: zero waveform gives all-zero spectrogram") {
  auto spec = stft<double>({std::vector<double>(1000, 0.0)}, cfg16k());
  for (const auto& c : spec.data) CHECK(std::abs(c) == 0.0);
}

TEST_CASE("stft: 1 kHz sine peaks at bin 32, matches direct DFT") {
  const auto cfg = cfg16k();
  std::vector<double> wave(2048);
  for (size_t i = 0; i < wave.size(); ++i)
    wave[i] = std::sin(2.0 * M_PI * 1000.0 * i / 16000.0);
  auto spec = stft<double>({wave}, cfg);
  REQUIRE(spec.frames == cfg.num_frames(wave.size()));

  const auto win = periodic_hann<double>(cfg.win_len);
  for (int t = 0; t < spec.frames; ++t) {
    int peak = 0;
    double best = 0;
    for (int f = 0; f < spec.bins; ++f) {
      const double m = std::abs(spec.at(0, f, t));
      if (m > best) {
        best = m;
        peak = f;
      }
    }
    CHECK(peak == 32);  // 1000 * 512 / 16000
  }

  // frame 1 against the direct DFT of the windowed segment
  std::vector<double> seg(cfg.fft_size, 0.0);
  for (int i = 0; i < cfg.win_len; ++i) seg[i] = wave[cfg.hop + i] * win[i];
  auto ref = tu::direct_dft(seg);
  for (int f = 0; f < spec.bins; ++f)
    CHECK(std::abs(spec.at(0, f, 1) - ref[f]) < 1e-8);
}

TEST_CASE("stft: 3 s clip has 186 frames") {
  auto spec = stft<double>({tu::random_wave(48000, 1)}, cfg16k());
  CHECK(spec.frames == 186);
  CHECK(spec.bins == 257);
}

TEST_CASE("stft: input shorter than a window is rejected") {
  CHECK_THROWS_WITH_AS(stft<double>({std::vector<double>(511, 0.1)}, cfg16k()),
                       "input too short", std::invalid_argument);
}

TEST_CASE("istft: round trip reconstructs the interior") {
  const auto cfg = cfg16k();
  auto wave = tu::random_wave(16000, 7);
  auto rec = istft(stft<double>({wave}, cfg), cfg)[0];
  double peak = 0;
  for (double s : wave) peak = std::max(peak, std::fabs(s));
  double worst = 0;
  for (size_t i = cfg.win_len; i + cfg.win_len < rec.size(); ++i)
    worst = std::max(worst, std::fabs(rec[i] - wave[i]) / peak);
  CHECK(worst < 1e-6);
}

TEST_CASE("istft: all-zero spectrogram gives all-zero waveform") {
  ComplexSpectrogram<double> spec(2, 257, 5, cfg16k());
  for (auto& ch : istft(spec, cfg16k()))
    for (double s : ch) CHECK(s == 0.0);
}

TEST_CASE("istft: single frame matches direct synthesis oracle") {
  const auto cfg = cfg16k();
  auto wave = tu::random_wave(512, 11);
  auto spec = stft<double>({wave}, cfg);
  REQUIRE(spec.frames == 1);
  auto out = istft(spec, cfg)[0];
  auto ref = wola_oracle(spec, 0, cfg);
  REQUIRE(out.size() == ref.size());
  for (size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(ref[i]).epsilon(1e-9));
}

TEST_CASE("istft: wrong bin count is a shape mismatch") {
  ComplexSpectrogram<double> spec(1, 128, 4, cfg16k());
  CHECK_THROWS_AS(istft(spec, cfg16k()), std::invalid_argument);
}

TEST_CASE("stft: Parseval energy within 1% of windowed time-domain energy") {
  const auto cfg = cfg16k();
  auto wave = tu::random_wave(8192, 3);
  auto spec = stft<double>({wave}, cfg);
  const auto win = periodic_hann<double>(cfg.win_len);

  double spec_energy = 0;
  for (int t = 0; t < spec.frames; ++t) {
    for (int f = 0; f < spec.bins; ++f) {
      const double m2 = std::norm(spec.at(0, f, t));
      spec_energy += (f == 0 || f == spec.bins - 1) ? m2 : 2.0 * m2;
    }
  }
  spec_energy /= cfg.fft_size;

  double time_energy = 0;
  for (int t = 0; t < spec.frames; ++t)
    for (int i = 0; i < cfg.win_len; ++i) {
      const double s = wave[t * cfg.hop + i] * win[i];
      time_energy += s * s;
    }
  CHECK(std::fabs(spec_energy / time_energy - 1.0) < 0.01);
}

TEST_CASE("istft: round trip property over random shapes") {
  const auto cfg = cfg16k();
  for (uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(seed + 100);
    const size_t n = 512 + rng.next_below(20000);
    const int channels = 1 + static_cast<int>(rng.next_below(3));
    std::vector<std::vector<double>> wave;
    for (int c = 0; c < channels; ++c)
      wave.push_back(tu::random_wave(n, seed * 13 + c));
    auto rec = istft(stft<double>(wave, cfg), cfg);
    for (int c = 0; c < channels; ++c) {
      double worst = 0;
      for (size_t i = cfg.win_len; i + cfg.win_len < rec[c].size(); ++i)
        worst = std::max(worst, std::fabs(rec[c][i] - wave[c][i]));
      CHECK(worst < 1e-9);
    }
  }
}
