// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <benchmark/benchmark.h>

#include "lszone/nn/kernels.hpp"
#include "lszone/rng.hpp"
#include "lszone/stft.hpp"

using namespace lszone;

namespace {

template <typename T>
void fill(Tensor3<T>& t, uint64_t seed) {
  Rng rng(seed);
  for (auto& v : t.v) v = static_cast<T>(rng.uniform(-1, 1));
}

void BM_fft512(benchmark::State& state) {
  Fft<float> fft(512);
  std::vector<std::complex<float>> buf(512);
  Rng rng(1);
  for (auto& c : buf) c = {static_cast<float>(rng.uniform(-1, 1)), 0.f};
  for (auto _ : state) {
    fft.forward(buf.data());
    benchmark::DoNotOptimize(buf.data());
  }
}
BENCHMARK(BM_fft512);

void BM_pointwise_conv_frame(benchmark::State& state) {
  // 72 -> 72 over 64 mel positions, one frame
  ConvSpec spec{.in_ch = 72, .out_ch = 72, .kernel = 1, .groups = 1};
  Tensor3<float> x(72, 64, 1), y(72, 64, 1);
  fill(x, 2);
  std::vector<float> w(72 * 72, 0.01f), b(72, 0.f);
  for (auto _ : state) {
    conv1d_forward<float>(x, spec, w.data(), b.data(), y);
    benchmark::DoNotOptimize(y.v.data());
  }
}
BENCHMARK(BM_pointwise_conv_frame);

void BM_gru_frame_all_bins(benchmark::State& state) {
  // one recurrent step for all 64 bins, 72 -> 144
  const int in = 72, hidden = 144, bins = 64;
  Tensor3<float> x(in, bins, 1), y;
  fill(x, 3);
  Rng rng(4);
  std::vector<float> w(in * 3 * hidden), u(hidden * 3 * hidden), b(3 * hidden, 0.f);
  for (auto& v : w) v = static_cast<float>(rng.uniform(-0.1, 0.1));
  for (auto& v : u) v = static_cast<float>(rng.uniform(-0.1, 0.1));
  std::vector<float> h0(bins * hidden, 0.f), hT;
  for (auto _ : state) {
    gru_forward<float>(x, h0, hidden, w.data(), u.data(), b.data(), y, hT, nullptr);
    h0 = hT;
    benchmark::DoNotOptimize(y.v.data());
  }
}
BENCHMARK(BM_gru_frame_all_bins);

}  // namespace

BENCHMARK_MAIN();
