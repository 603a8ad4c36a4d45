// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace lszone {

using Vec3 = std::array<double, 3>;

// Shoebox cabin. rt60 is the requested reverberation time; wall reflectivity
// comes from a Schroeder-calibrated mapping for this geometry (see room.cpp).
struct RoomSpec {
  Vec3 dims{1.45, 2.70, 1.25};
  double rt60 = 0.07;
  double speed_of_sound = 343.0;
  int sample_rate = 16000;
  // Image sources of order >= 1 are jittered by up to this many meters so
  // that distinct seeds give decorrelated impulse responses.
  double image_jitter = 0.01;
};

double room_volume(const RoomSpec& room);
double room_surface(const RoomSpec& room);

// Sabine absorption 0.161 V / (S rt60); also the validity check for rt60.
double sabine_alpha(const RoomSpec& room);

// Uniform wall reflection coefficient that makes the Schroeder-measured T60
// of generated responses match the requested rt60 for this cabin geometry.
double beta_for_rt60(const RoomSpec& room);

// Allen-Berkley image method with 8-tap Hann-windowed-sinc fractional delays
// and 1/(4 pi d) spreading. Length >= rt60 * sample_rate samples.
// max_order < 0 picks the order covering the response length; max_order == 0
// keeps only the direct path.
std::vector<double> generate_rir(const RoomSpec& room, const Vec3& src,
                                 const Vec3& mic, uint64_t seed,
                                 int max_order = -1);

// Backward energy integration, line fit between -5 dB and -25 dB.
double schroeder_t60(const std::vector<double>& rir, int sample_rate);

}  // namespace lszone
