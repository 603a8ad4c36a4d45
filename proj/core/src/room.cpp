// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lszone/room.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lszone/rng.hpp"

namespace lszone {

namespace {

// Schroeder-T60 of image-method responses in this cabin, fitted once against
// a beta grid (tools/calibrate_rt60.cpp regenerates these):
//   ln T60 = c0 + c1 u + c2 u^2,  u = ln(-ln beta)
// The naive Sabine inversion drifts past +/-20% at the ends of the
// [50ms, 90ms] band for a cabin this small and absorptive.
constexpr double kFitC0 = -3.2240;
constexpr double kFitC1 = -0.7167;
constexpr double kFitC2 = 0.1579;

double fitted_t60(double beta) {
  const double u = std::log(-std::log(beta));
  return std::exp(kFitC0 + kFitC1 * u + kFitC2 * u * u);
}

double sinc(double x) {
  if (std::fabs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace

double room_volume(const RoomSpec& r) { return r.dims[0] * r.dims[1] * r.dims[2]; }

double room_surface(const RoomSpec& r) {
  return 2.0 * (r.dims[0] * r.dims[1] + r.dims[0] * r.dims[2] +
                r.dims[1] * r.dims[2]);
}

double sabine_alpha(const RoomSpec& r) {
  return 0.161 * room_volume(r) / (room_surface(r) * r.rt60);
}

double beta_for_rt60(const RoomSpec& r) {
  const double alpha = sabine_alpha(r);
  if (alpha > 1.0)
    throw std::invalid_argument("rt60 too small for geometry (sabine alpha " +
                                std::to_string(alpha) + " > 1)");
  // invert the monotone fitted curve by bisection
  double lo = 0.05, hi = 0.98;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fitted_t60(mid) < r.rt60)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> generate_rir(const RoomSpec& room, const Vec3& src,
                                 const Vec3& mic, uint64_t seed, int max_order) {
  for (int a = 0; a < 3; ++a) {
    if (src[a] <= 0.0 || src[a] >= room.dims[a] || mic[a] <= 0.0 ||
        mic[a] >= room.dims[a])
      throw std::invalid_argument("rir: position outside room");
  }
  if (src == mic) throw std::invalid_argument("rir: source equals microphone");
  const double beta = beta_for_rt60(room);  // validates sabine alpha too

  const double fs = room.sample_rate;
  const int n = static_cast<int>(std::ceil(room.rt60 * fs)) + 64;
  const double max_dist = (n / fs) * room.speed_of_sound;

  int nx = static_cast<int>(std::ceil(max_dist / (2.0 * room.dims[0])));
  int ny = static_cast<int>(std::ceil(max_dist / (2.0 * room.dims[1])));
  int nz = static_cast<int>(std::ceil(max_dist / (2.0 * room.dims[2])));
  if (max_order == 0) nx = ny = nz = 0;

  std::vector<double> h(n, 0.0);
  Rng rng(derive_seed(seed, 0x5252u));

  for (int mx = -nx; mx <= nx; ++mx)
    for (int my = -ny; my <= ny; ++my)
      for (int mz = -nz; mz <= nz; ++mz)
        for (int px = 0; px < 2; ++px)
          for (int py = 0; py < 2; ++py)
            for (int pz = 0; pz < 2; ++pz) {
              const int refl = std::abs(mx - px) + std::abs(mx) +
                               std::abs(my - py) + std::abs(my) +
                               std::abs(mz - pz) + std::abs(mz);
              if (max_order == 0 && refl != 0) continue;
              Vec3 img{(1 - 2 * px) * src[0] + 2.0 * mx * room.dims[0],
                       (1 - 2 * py) * src[1] + 2.0 * my * room.dims[1],
                       (1 - 2 * pz) * src[2] + 2.0 * mz * room.dims[2]};
              if (refl > 0 && room.image_jitter > 0.0) {
                // keep the rng stream position independent of pruning below
                for (int a = 0; a < 3; ++a)
                  img[a] += rng.uniform(-room.image_jitter, room.image_jitter);
              }
              const double dx = img[0] - mic[0];
              const double dy = img[1] - mic[1];
              const double dz = img[2] - mic[2];
              const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
              const double tau = d / room.speed_of_sound * fs;
              if (tau >= n - 5) continue;
              const double amp =
                  std::pow(beta, refl) / (4.0 * M_PI * std::max(d, 1e-3));
              const int base = static_cast<int>(std::floor(tau)) - 3;
              for (int i = std::max(base, 0); i < std::min(base + 8, n); ++i) {
                const double u = i - tau;
                if (std::fabs(u) < 4.0)
                  h[i] += amp * sinc(u) * 0.5 * (1.0 + std::cos(M_PI * u / 4.0));
              }
            }
  return h;
}

double schroeder_t60(const std::vector<double>& rir, int sample_rate) {
  if (rir.empty()) throw std::invalid_argument("t60: empty response");
  const size_t n = rir.size();
  std::vector<double> edc(n);
  double acc = 0.0;
  for (size_t i = n; i-- > 0;) {
    acc += rir[i] * rir[i];
    edc[i] = acc;
  }
  if (edc[0] <= 0.0) throw std::invalid_argument("t60: silent response");

  std::vector<double> db(n);
  for (size_t i = 0; i < n; ++i)
    db[i] = 10.0 * std::log10(std::max(edc[i] / edc[0], 1e-30));

  size_t i5 = n, i25 = n;
  for (size_t i = 0; i < n; ++i) {
    if (i5 == n && db[i] <= -5.0) i5 = i;
    if (db[i] <= -25.0) {
      i25 = i;
      break;
    }
  }
  if (i5 >= i25 || i25 == n)
    throw std::invalid_argument("t60: decay range not covered by response");

  // least-squares line through (t, db) on [i5, i25)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double count = static_cast<double>(i25 - i5);
  for (size_t i = i5; i < i25; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    sx += t;
    sy += db[i];
    sxx += t * t;
    sxy += t * db[i];
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  if (slope >= 0.0) throw std::invalid_argument("t60: non-decaying response");
  return -60.0 / slope;
}

}  // namespace lszone
