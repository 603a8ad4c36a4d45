// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lszone/stft.hpp"

namespace lszone {

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// HTK-style triangular filters, unit peak, fmin=0, fmax=8000. weights is
// [n_mel rows x bins cols], row-major.
template <typename T>
struct MelFilterbank {
  int n_mel = 0;
  int bins = 0;
  double fmin = 0.0;
  double fmax = 8000.0;
  std::vector<T> weights;     // n_mel * bins
  std::vector<T> row_sums;    // n_mel
  std::vector<double> center_hz;  // n_mel triangle peaks

  const T* row(int m) const { return weights.data() + static_cast<size_t>(m) * bins; }
};

template <typename T>
MelFilterbank<T> mel_filterbank(int bins, int n_mel, int sample_rate,
                                double fmin = 0.0, double fmax = 8000.0) {
  if (n_mel <= 0 || bins <= 0 || n_mel >= bins)
    throw std::invalid_argument("mel: need n_mel < bins");
  MelFilterbank<T> fb;
  fb.n_mel = n_mel;
  fb.bins = bins;
  fb.fmin = fmin;
  fb.fmax = fmax;
  fb.weights.assign(static_cast<size_t>(n_mel) * bins, T(0));
  fb.row_sums.assign(n_mel, T(0));
  fb.center_hz.resize(n_mel);

  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> pts(n_mel + 2);
  for (int i = 0; i < n_mel + 2; ++i)
    pts[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mel + 1));

  const int fft_size = 2 * (bins - 1);
  for (int m = 0; m < n_mel; ++m) {
    const double l = pts[m], c = pts[m + 1], r = pts[m + 2];
    fb.center_hz[m] = c;
    for (int k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / fft_size;
      const double rise = (hz - l) / (c - l);
      const double fall = (r - hz) / (r - c);
      const double w = std::clamp(std::min(rise, fall), 0.0, 1.0);
      fb.weights[static_cast<size_t>(m) * bins + k] = static_cast<T>(w);
      fb.row_sums[m] += static_cast<T>(w);
    }
  }
  return fb;
}

// Linear-magnitude mel energies, [frame t][channel z][mel m] in memory.
// Kept linear (no log, no power) so the decoder output maps straight back to
// linear magnitudes for synthesis.
template <typename T>
struct MelFeature {
  int n_mel = 0;
  int frames = 0;
  int channels = 0;
  std::vector<T> v;

  MelFeature() = default;
  MelFeature(int m, int t, int z) : n_mel(m), frames(t), channels(z) {
    v.assign(static_cast<size_t>(m) * t * z, T(0));
  }
  T& at(int m, int t, int z) {
    return v[(static_cast<size_t>(t) * channels + z) * n_mel + m];
  }
  T at(int m, int t, int z) const {
    return v[(static_cast<size_t>(t) * channels + z) * n_mel + m];
  }
  T* vec(int t, int z) {
    return v.data() + (static_cast<size_t>(t) * channels + z) * n_mel;
  }
  const T* vec(int t, int z) const {
    return v.data() + (static_cast<size_t>(t) * channels + z) * n_mel;
  }
};

// mel vector for one spectrum: out[m] = sum_f fb[m,f] * |spec[f]|
template <typename T>
void apply_mel_frame(const MelFilterbank<T>& fb, const std::complex<T>* spectrum,
                     T* out, T* mag_scratch) {
  for (int f = 0; f < fb.bins; ++f) mag_scratch[f] = std::abs(spectrum[f]);
  for (int m = 0; m < fb.n_mel; ++m) {
    const T* w = fb.row(m);
    T acc0 = 0, acc1 = 0;
    int f = 0;
    for (; f + 1 < fb.bins; f += 2) {
      acc0 += w[f] * mag_scratch[f];
      acc1 += w[f + 1] * mag_scratch[f + 1];
    }
    if (f < fb.bins) acc0 += w[f] * mag_scratch[f];
    out[m] = acc0 + acc1;
  }
}

template <typename T>
MelFeature<T> apply_mel(const ComplexSpectrogram<T>& spec, const MelFilterbank<T>& fb) {
  if (spec.bins != fb.bins) throw std::invalid_argument("apply_mel: shape mismatch");
  MelFeature<T> out(fb.n_mel, spec.frames, spec.channels);
  std::vector<T> mag(fb.bins);
  for (int t = 0; t < spec.frames; ++t)
    for (int z = 0; z < spec.channels; ++z)
      apply_mel_frame(fb, spec.spectrum(z, t), out.vec(t, z), mag.data());
  return out;
}

// Approximate mel -> linear-magnitude map: column-normalized transpose,
// inv[f,m] = fb[m,f] / max(row_sum(m), eps). Nonnegative by construction,
// unlike an exact pseudo-inverse. Stored [bin f][mel m], row-major.
template <typename T>
std::vector<T> mel_inverse(const MelFilterbank<T>& fb, T eps = T(1e-8)) {
  std::vector<T> inv(static_cast<size_t>(fb.bins) * fb.n_mel, T(0));
  for (int m = 0; m < fb.n_mel; ++m) {
    const T denom = std::max(fb.row_sums[m], eps);
    const T* w = fb.row(m);
    for (int f = 0; f < fb.bins; ++f)
      inv[static_cast<size_t>(f) * fb.n_mel + m] = w[f] / denom;
  }
  return inv;
}

// magnitudes[f] = sum_m inv[f,m] * max(mel[m], 0)
template <typename T>
void mel_expand_frame(const std::vector<T>& inv, int bins, int n_mel,
                      const T* mel_vec, T* out_mag) {
  for (int f = 0; f < bins; ++f) {
    const T* r = inv.data() + static_cast<size_t>(f) * n_mel;
    T acc = 0;
    for (int m = 0; m < n_mel; ++m) acc += r[m] * std::max(mel_vec[m], T(0));
    out_mag[f] = acc;
  }
}

}  // namespace lszone
