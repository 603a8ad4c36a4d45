// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace lszone {

// Hidden activation block indexed (feature c, band b, frame t).
// Memory is frame-major with the feature axis contiguous: index
// ((t * bands + b) * features + c). That keeps per-frame slices and
// per-position feature vectors contiguous, which is what both the
// crossband convolutions and the narrowband recurrence want.
template <typename T>
struct Tensor3 {
  int features = 0;
  int bands = 0;
  int frames = 0;
  std::vector<T> v;

  Tensor3() = default;
  Tensor3(int c, int b, int t) : features(c), bands(b), frames(t) {
    v.assign(static_cast<size_t>(c) * b * t, T(0));
  }

  T& at(int c, int b, int t) {
    return v[(static_cast<size_t>(t) * bands + b) * features + c];
  }
  T at(int c, int b, int t) const {
    return v[(static_cast<size_t>(t) * bands + b) * features + c];
  }

  // contiguous feature vector at one (band, frame) position
  T* pos(int b, int t) {
    return v.data() + (static_cast<size_t>(t) * bands + b) * features;
  }
  const T* pos(int b, int t) const {
    return v.data() + (static_cast<size_t>(t) * bands + b) * features;
  }

  // contiguous [bands x features] slice of one frame
  T* frame(int t) { return v.data() + static_cast<size_t>(t) * bands * features; }
  const T* frame(int t) const {
    return v.data() + static_cast<size_t>(t) * bands * features;
  }

  size_t size() const { return v.size(); }
  bool same_shape(const Tensor3& o) const {
    return features == o.features && bands == o.bands && frames == o.frames;
  }
  void zero() { std::fill(v.begin(), v.end(), T(0)); }
};

}  // namespace lszone
