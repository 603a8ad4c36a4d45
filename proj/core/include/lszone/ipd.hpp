// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lszone/stft.hpp"

namespace lszone {

// wrap into (-pi, pi]
template <typename T>
T wrap_angle(T a) {
  T y = std::fmod(a + T(M_PI), T(2.0 * M_PI));
  if (y <= T(0)) y += T(2.0 * M_PI);
  return y - T(M_PI);
}

// Pairwise phase differences, [frame t][zone z][pair k'][bin f] in memory.
// For zone z the pair index k' runs over the other zones in ascending order.
template <typename T>
struct IpdTensor {
  int zones = 0;
  int pairs = 0;  // zones - 1
  int bins = 0;
  int frames = 0;
  std::vector<T> v;

  IpdTensor() = default;
  IpdTensor(int z, int f, int t) : zones(z), pairs(z - 1), bins(f), frames(t) {
    v.assign(static_cast<size_t>(z) * pairs * f * t, T(0));
  }
  T& at(int z, int k, int f, int t) {
    return v[((static_cast<size_t>(t) * zones + z) * pairs + k) * bins + f];
  }
  T at(int z, int k, int f, int t) const {
    return v[((static_cast<size_t>(t) * zones + z) * pairs + k) * bins + f];
  }
  // contiguous [pairs x bins] slab for one (zone, frame)
  T* slab(int z, int t) {
    return v.data() + (static_cast<size_t>(t) * zones + z) * pairs * bins;
  }
  const T* slab(int z, int t) const {
    return v.data() + (static_cast<size_t>(t) * zones + z) * pairs * bins;
  }
};

// phases[z * bins + f] for one frame -> ipd slabs for all zones of that frame
template <typename T>
void compute_ipd_frame(const T* phases, int zones, int bins, T* out) {
  for (int z = 0; z < zones; ++z) {
    T* zs = out + static_cast<size_t>(z) * (zones - 1) * bins;
    int k = 0;
    for (int other = 0; other < zones; ++other) {
      if (other == z) continue;
      const T* pz = phases + static_cast<size_t>(z) * bins;
      const T* pk = phases + static_cast<size_t>(other) * bins;
      T* row = zs + static_cast<size_t>(k) * bins;
      for (int f = 0; f < bins; ++f) row[f] = wrap_angle(pz[f] - pk[f]);
      ++k;
    }
  }
}

template <typename T>
IpdTensor<T> compute_ipd(const ComplexSpectrogram<T>& spec) {
  if (spec.channels < 2)
    throw std::invalid_argument("IPD requires >=2 channels");
  IpdTensor<T> ipd(spec.channels, spec.bins, spec.frames);
  std::vector<T> phases(static_cast<size_t>(spec.channels) * spec.bins);
  for (int t = 0; t < spec.frames; ++t) {
    for (int z = 0; z < spec.channels; ++z) {
      const std::complex<T>* s = spec.spectrum(z, t);
      T* p = phases.data() + static_cast<size_t>(z) * spec.bins;
      for (int f = 0; f < spec.bins; ++f) p[f] = std::atan2(s[f].imag(), s[f].real());
    }
    compute_ipd_frame(phases.data(), spec.channels, spec.bins,
                      ipd.v.data() + static_cast<size_t>(t) * spec.channels *
                                         ipd.pairs * spec.bins);
  }
  return ipd;
}

}  // namespace lszone
