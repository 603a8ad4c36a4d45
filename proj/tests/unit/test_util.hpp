// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "lszone/rng.hpp"
#include "lszone/tensor.hpp"

namespace lszone::testutil {

inline std::vector<double> random_wave(size_t n, uint64_t seed, double amp = 0.5) {
  Rng rng(seed);
  std::vector<double> w(n);
  for (auto& s : w) s = rng.uniform(-amp, amp);
  return w;
}

template <typename T>
void fill_random(Tensor3<T>& t, uint64_t seed, double amp = 1.0) {
  Rng rng(seed);
  for (auto& v : t.v) v = static_cast<T>(rng.uniform(-amp, amp));
}

// Naive O(N^2) DFT, the reference for FFT-based paths.
inline std::vector<std::complex<double>> direct_dft(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0;
    for (size_t i = 0; i < n; ++i) {
      const double a = -2.0 * M_PI * static_cast<double>(k * i % n) / n;
      acc += x[i] * std::complex<double>(std::cos(a), std::sin(a));
    }
    out[k] = acc;
  }
  return out;
}

// Central finite difference of f at theta, step scaled to the parameter.
inline double central_diff(const std::function<double()>& f, double& theta,
                           double h = 1e-5) {
  const double orig = theta;
  const double step = h * std::max(1.0, std::fabs(orig));
  theta = orig + step;
  const double fp = f();
  theta = orig - step;
  const double fm = f();
  theta = orig;
  return (fp - fm) / (2.0 * step);
}

// relative gradient error with an absolute floor for near-zero pairs
inline double grad_rel_err(double analytic, double numeric) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / denom;
}

}  // namespace lszone::testutil
