// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lszone/rng.hpp"

namespace lszone {

template <typename T>
struct ParamEntry {
  std::string name;
  std::vector<int> dims;
  std::vector<T> value;
  std::vector<T> grad;

  size_t count() const { return value.size(); }
};

// Flat registry of named parameter tensors plus matching gradient buffers.
// Initialization draws are made in registration order from one SplitMix64
// stream, so a given seed reproduces the same bytes on every run.
template <typename T>
class ParamStore {
 public:
  explicit ParamStore(uint64_t seed) : rng_(seed) {}

  // fan_in > 0: uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
  // fan_in == 0: zeros (biases). fan_in < 0: ones (norm gains).
  int add(const std::string& name, std::vector<int> dims, int fan_in) {
    if (by_name_.count(name)) throw std::invalid_argument("duplicate param " + name);
    size_t n = 1;
    for (int d : dims) {
      if (d <= 0) throw std::invalid_argument("bad dim in " + name);
      n *= static_cast<size_t>(d);
    }
    ParamEntry<T> e;
    e.name = name;
    e.dims = std::move(dims);
    e.value.resize(n);
    e.grad.assign(n, T(0));
    if (fan_in > 0) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (size_t i = 0; i < n; ++i)
        e.value[i] = static_cast<T>(rng_.uniform(-bound, bound));
    } else {
      std::fill(e.value.begin(), e.value.end(), fan_in < 0 ? T(1) : T(0));
    }
    by_name_[name] = static_cast<int>(entries_.size());
    entries_.push_back(std::move(e));
    return static_cast<int>(entries_.size()) - 1;
  }

  ParamEntry<T>& operator[](int h) { return entries_[h]; }
  const ParamEntry<T>& operator[](int h) const { return entries_[h]; }

  int find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? -1 : it->second;
  }

  size_t size() const { return entries_.size(); }
  std::vector<ParamEntry<T>>& entries() { return entries_; }
  const std::vector<ParamEntry<T>>& entries() const { return entries_; }

  size_t param_count() const {
    size_t n = 0;
    for (const auto& e : entries_) n += e.count();
    return n;
  }

  void zero_grad() {
    for (auto& e : entries_) std::fill(e.grad.begin(), e.grad.end(), T(0));
  }

 private:
  Rng rng_;
  std::vector<ParamEntry<T>> entries_;
  std::unordered_map<std::string, int> by_name_;
};

// Adam with bias correction. Moment buffers are lazily sized to the store.
template <typename T>
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamStore<T>& store, double lr) {
    if (m_.size() != store.size()) {
      m_.resize(store.size());
      v_.resize(store.size());
      for (size_t i = 0; i < store.size(); ++i) {
        m_[i].assign(store[static_cast<int>(i)].count(), T(0));
        v_[i].assign(store[static_cast<int>(i)].count(), T(0));
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < store.size(); ++i) {
      auto& e = store[static_cast<int>(i)];
      auto& m = m_[i];
      auto& v = v_[i];
      for (size_t k = 0; k < e.count(); ++k) {
        const double g = static_cast<double>(e.grad[k]);
        m[k] = static_cast<T>(beta1_ * m[k] + (1.0 - beta1_) * g);
        v[k] = static_cast<T>(beta2_ * v[k] + (1.0 - beta2_) * g * g);
        const double mhat = m[k] / bc1;
        const double vhat = v[k] / bc2;
        e.value[k] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  int64_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

}  // namespace lszone
