// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace lszone {

// 16 kHz, 32 ms periodic-Hann window, 16 ms hop. 50% overlap satisfies COLA,
// so weighted overlap-add with window-sum normalization inverts exactly.
struct StftConfig {
  int sample_rate = 16000;
  int win_len = 512;
  int hop = 256;
  int fft_size = 512;

  int bins() const { return fft_size / 2 + 1; }

  void validate() const {
    if (win_len <= 0 || hop <= 0 || fft_size < win_len)
      throw std::invalid_argument("stft: invalid window/hop/fft sizes");
    if (hop * 2 != win_len)
      throw std::invalid_argument("stft: hop must be half the window (50% overlap)");
    if ((fft_size & (fft_size - 1)) != 0)
      throw std::invalid_argument("stft: fft size must be a power of two");
  }

  // frames for an input of n samples, causal framing, no center padding
  int num_frames(size_t n) const {
    if (n < static_cast<size_t>(win_len)) return 0;
    return 1 + static_cast<int>((n - win_len) / hop);
  }
};

template <typename T>
std::vector<T> periodic_hann(int n) {
  std::vector<T> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = static_cast<T>(0.5 * (1.0 - std::cos(2.0 * M_PI * i / n)));
  return w;
}

// Iterative radix-2 complex FFT with precomputed twiddles.
template <typename T>
class Fft {
 public:
  explicit Fft(int n) : n_(n) {
    if (n < 2 || (n & (n - 1)) != 0)
      throw std::invalid_argument("fft: size must be a power of two >= 2");
    rev_.resize(n);
    int log2n = 0;
    while ((1 << log2n) < n) ++log2n;
    for (int i = 0; i < n; ++i) {
      unsigned r = 0;
      for (int b = 0; b < log2n; ++b)
        if (i & (1 << b)) r |= 1u << (log2n - 1 - b);
      rev_[i] = static_cast<int>(r);
    }
    tw_.resize(n / 2);
    for (int k = 0; k < n / 2; ++k) {
      double a = -2.0 * M_PI * k / n;
      tw_[k] = {static_cast<T>(std::cos(a)), static_cast<T>(std::sin(a))};
    }
  }

  void forward(std::complex<T>* x) const { run(x, false); }
  void inverse(std::complex<T>* x) const {
    run(x, true);
    const T s = T(1) / static_cast<T>(n_);
    for (int i = 0; i < n_; ++i) x[i] *= s;
  }

  int size() const { return n_; }

 private:
  void run(std::complex<T>* x, bool inv) const {
    for (int i = 0; i < n_; ++i) {
      int j = rev_[i];
      if (i < j) std::swap(x[i], x[j]);
    }
    for (int len = 2; len <= n_; len <<= 1) {
      int half = len >> 1;
      int step = n_ / len;
      for (int i = 0; i < n_; i += len) {
        for (int k = 0; k < half; ++k) {
          std::complex<T> w = tw_[static_cast<size_t>(k) * step];
          if (inv) w = std::conj(w);
          std::complex<T> u = x[i + k];
          std::complex<T> v = x[i + k + half] * w;
          x[i + k] = u + v;
          x[i + k + half] = u - v;
        }
      }
    }
  }

  int n_;
  std::vector<int> rev_;
  std::vector<std::complex<T>> tw_;
};

// Per-channel complex half-spectra, [channel z][frame t][bin f] in memory so a
// single (z, t) spectrum is contiguous.
template <typename T>
struct ComplexSpectrogram {
  int channels = 0;
  int bins = 0;
  int frames = 0;
  StftConfig config;
  std::vector<std::complex<T>> data;

  ComplexSpectrogram() = default;
  ComplexSpectrogram(int z, int f, int t, const StftConfig& cfg)
      : channels(z), bins(f), frames(t), config(cfg) {
    data.assign(static_cast<size_t>(z) * f * t, {T(0), T(0)});
  }

  std::complex<T>& at(int z, int f, int t) {
    return data[(static_cast<size_t>(z) * frames + t) * bins + f];
  }
  std::complex<T> at(int z, int f, int t) const {
    return data[(static_cast<size_t>(z) * frames + t) * bins + f];
  }
  std::complex<T>* spectrum(int z, int t) {
    return data.data() + (static_cast<size_t>(z) * frames + t) * bins;
  }
  const std::complex<T>* spectrum(int z, int t) const {
    return data.data() + (static_cast<size_t>(z) * frames + t) * bins;
  }
};

// One analysis frame: windowed real input -> half spectrum. scratch must hold
// fft_size complex values.
template <typename T>
void stft_frame(const T* samples, const std::vector<T>& window, const Fft<T>& fft,
                std::complex<T>* scratch, std::complex<T>* out_bins) {
  const int n = fft.size();
  const int w = static_cast<int>(window.size());
  for (int i = 0; i < w; ++i) scratch[i] = {samples[i] * window[i], T(0)};
  for (int i = w; i < n; ++i) scratch[i] = {T(0), T(0)};
  fft.forward(scratch);
  for (int f = 0; f <= n / 2; ++f) out_bins[f] = scratch[f];
}

// Half spectrum -> real synthesis frame (inverse FFT of the conjugate-symmetric
// extension). out must hold fft_size samples.
template <typename T>
void istft_frame(const std::complex<T>* bins, const Fft<T>& fft,
                 std::complex<T>* scratch, T* out) {
  const int n = fft.size();
  for (int f = 0; f <= n / 2; ++f) scratch[f] = bins[f];
  for (int f = n / 2 + 1; f < n; ++f) scratch[f] = std::conj(bins[n - f]);
  fft.inverse(scratch);
  for (int i = 0; i < n; ++i) out[i] = scratch[i].real();
}

template <typename T>
ComplexSpectrogram<T> stft(const std::vector<std::vector<T>>& wave,
                           const StftConfig& cfg) {
  cfg.validate();
  if (wave.empty()) throw std::invalid_argument("stft: no channels");
  const size_t n = wave[0].size();
  for (const auto& ch : wave)
    if (ch.size() != n) throw std::invalid_argument("stft: ragged channels");
  if (n < static_cast<size_t>(cfg.win_len))
    throw std::invalid_argument("input too short");

  const int frames = cfg.num_frames(n);
  const int z_count = static_cast<int>(wave.size());
  ComplexSpectrogram<T> spec(z_count, cfg.bins(), frames, cfg);

  const auto window = periodic_hann<T>(cfg.win_len);
  Fft<T> fft(cfg.fft_size);
  std::vector<std::complex<T>> scratch(cfg.fft_size);
  for (int z = 0; z < z_count; ++z)
    for (int t = 0; t < frames; ++t)
      stft_frame(wave[z].data() + static_cast<size_t>(t) * cfg.hop, window, fft,
                 scratch.data(), spec.spectrum(z, t));
  return spec;
}

// Weighted overlap-add inverse. Output covers (frames-1)*hop + win_len
// samples; positions whose accumulated squared-window sum falls below 1e-8
// are zeroed instead of amplified.
template <typename T>
std::vector<std::vector<T>> istft(const ComplexSpectrogram<T>& spec,
                                  const StftConfig& cfg) {
  cfg.validate();
  if (spec.bins != cfg.bins())
    throw std::invalid_argument("shape mismatch: expected " +
                                std::to_string(cfg.bins()) + " bins, got " +
                                std::to_string(spec.bins));
  const int frames = spec.frames;
  const size_t out_len =
      frames > 0 ? static_cast<size_t>(frames - 1) * cfg.hop + cfg.win_len : 0;

  const auto window = periodic_hann<T>(cfg.win_len);
  Fft<T> fft(cfg.fft_size);
  std::vector<std::complex<T>> scratch(cfg.fft_size);
  std::vector<T> frame(cfg.fft_size);

  std::vector<std::vector<T>> out(spec.channels, std::vector<T>(out_len, T(0)));
  std::vector<T> wsum(out_len, T(0));
  for (int z = 0; z < spec.channels; ++z) {
    std::fill(wsum.begin(), wsum.end(), T(0));
    auto& y = out[z];
    for (int t = 0; t < frames; ++t) {
      istft_frame(spec.spectrum(z, t), fft, scratch.data(), frame.data());
      const size_t base = static_cast<size_t>(t) * cfg.hop;
      for (int i = 0; i < cfg.win_len; ++i) {
        y[base + i] += window[i] * frame[i];
        wsum[base + i] += window[i] * window[i];
      }
    }
    for (size_t i = 0; i < out_len; ++i)
      y[i] = wsum[i] < T(1e-8) ? T(0) : y[i] / wsum[i];
  }
  return out;
}

}  // namespace lszone
