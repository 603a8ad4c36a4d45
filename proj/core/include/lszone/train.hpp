// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Complex-spectrogram MSE training. The loss compares reconstructed per-zone
// complex spectra (mel-inverse magnitudes times the mixture phase) with the
// target's spectra; the fixed mel-inverse matrix takes part in backprop as a
// constant linear map. Reductions run serially so a seed pins the loss curve.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lszone/model.hpp"
#include "lszone/scene.hpp"
#include "lszone/wav.hpp"
#include "lszone/weights_io.hpp"

namespace lszone {

struct TrainConfig {
  double lr0 = 1e-3;
  double lr_decay = 0.99;
  int batch_size = 4;
  int epochs = 50;
  double clip_seconds = 3.0;
  uint64_t seed = 1234;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const {
    if (lr0 <= 0.0) throw std::invalid_argument("train: lr0 must be positive");
    if (lr_decay <= 0.0 || lr_decay > 1.0)
      throw std::invalid_argument("train: decay must be in (0, 1]");
    if (batch_size <= 0 || epochs <= 0)
      throw std::invalid_argument("train: batch/epochs must be positive");
  }
};

// lr = lr0 * decay^epoch
inline double lr_schedule(const TrainConfig& cfg, int epoch) {
  return cfg.lr0 * std::pow(cfg.lr_decay, epoch);
}

// Mean over every real/imag entry of the per-zone complex spectrogram
// difference. With grad_scale > 0 the scaled gradient is pushed through the
// model into its parameter store.
template <typename T>
double loss_mse_complex(LSZoneModel<T>& model, const ComplexSpectrogram<T>& mix,
                        const ComplexSpectrogram<T>& target,
                        double grad_scale = 0.0) {
  const auto& cfg = model.config();
  if (target.channels != cfg.zones || target.frames != mix.frames ||
      target.bins != mix.bins)
    throw std::invalid_argument("loss: target shape mismatch");

  const int Z = cfg.zones, F = mix.bins, Tn = mix.frames, M = cfg.n_mel;
  const bool with_grad = grad_scale > 0.0;
  ModelCache<T> cache;
  MelFeature<T> mel_hat =
      model.forward_offline(mix, with_grad ? &cache : nullptr);

  const auto& inv = model.filterbank_inverse();
  const double denom = 2.0 * static_cast<double>(Z) * F * Tn;
  double loss = 0.0;
  MelFeature<T> grad_mel(M, Tn, Z);
  std::vector<T> mag(F), dmag(F);

  for (int z = 0; z < Z; ++z)
    for (int t = 0; t < Tn; ++t) {
      const T* mel_vec = mel_hat.vec(t, z);
      mel_expand_frame(inv, F, M, mel_vec, mag.data());
      const std::complex<T>* phase_src = mix.spectrum(z, t);
      const std::complex<T>* tgt = target.spectrum(z, t);
      for (int f = 0; f < F; ++f) {
        T pre, pim;
        unit_phasor(phase_src[f], pre, pim);
        const double dre = static_cast<double>(mag[f] * pre) - tgt[f].real();
        const double dim = static_cast<double>(mag[f] * pim) - tgt[f].imag();
        loss += dre * dre + dim * dim;
        if (with_grad)
          dmag[f] = static_cast<T>(2.0 / denom * (dre * pre + dim * pim));
      }
      if (with_grad) {
        T* gm = grad_mel.vec(t, z);
        for (int m = 0; m < M; ++m) {
          double acc = 0.0;
          if (mel_vec[m] > T(0)) {
            for (int f = 0; f < F; ++f)
              acc += static_cast<double>(inv[static_cast<size_t>(f) * M + m]) *
                     dmag[f];
          }
          gm[m] = static_cast<T>(acc * grad_scale);
        }
      }
    }
  loss /= denom;
  if (with_grad) model.backward(cache, grad_mel);
  return loss;
}

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> curve;
  std::string final_weights_path;
  std::string curve_path;
};

// One JSON object per epoch: {"epoch":..,"lr":..,"mean_loss":..}
inline std::string epoch_record_json(const EpochRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "{\"epoch\":%d,\"lr\":%.17g,\"mean_loss\":%.17g}",
                r.epoch, r.lr, r.mean_loss);
  return buf;
}

// Desk-scale trainer: whole dataset in memory, seeded shuffles, serial
// reductions, one checkpoint per epoch plus final weights.
template <typename T>
TrainResult train(LSZoneModel<T>& model, const std::string& dataset_dir,
                  const TrainConfig& tc, const std::string& out_dir) {
  tc.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  auto manifest = load_manifest((fs::path(dataset_dir) / "manifest.jsonl").string());
  if (manifest.empty()) throw std::runtime_error("train: empty dataset");

  const auto& scfg = model.config().stft;
  struct Sample {
    ComplexSpectrogram<T> mix, target;
  };
  std::vector<Sample> samples;
  for (const auto& e : manifest) {
    auto mix = read_wav((fs::path(dataset_dir) / e.mixture_path).string(),
                        scfg.sample_rate);
    auto tgt = read_wav((fs::path(dataset_dir) / e.target_path).string(),
                        scfg.sample_rate);
    std::vector<std::vector<T>> mix_t, tgt_t;
    for (const auto& ch : mix.samples) mix_t.emplace_back(ch.begin(), ch.end());
    for (const auto& ch : tgt.samples) tgt_t.emplace_back(ch.begin(), ch.end());
    samples.push_back({stft(mix_t, scfg), stft(tgt_t, scfg)});
  }

  Adam<T> opt(tc.adam_beta1, tc.adam_beta2, tc.adam_eps);
  TrainResult result;
  const auto curve_path = fs::path(out_dir) / "loss_curve.jsonl";
  std::ofstream curve(curve_path, std::ios::trunc);
  if (!curve) throw std::runtime_error("train: cannot write loss curve");

  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    const double lr = lr_schedule(tc, epoch);
    Rng shuffle_rng(derive_seed(tc.seed, static_cast<uint64_t>(epoch)));
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);

    double epoch_loss = 0.0;
    size_t seen = 0;
    for (size_t start = 0; start < order.size(); start += tc.batch_size) {
      const size_t end = std::min(order.size(), start + tc.batch_size);
      model.store().zero_grad();
      const double scale = 1.0 / static_cast<double>(end - start);
      for (size_t k = start; k < end; ++k) {
        const auto& s = samples[order[k]];
        epoch_loss += loss_mse_complex(model, s.mix, s.target, scale);
        ++seen;
      }
      opt.step(model.store(), lr);
    }

    EpochRecord rec{epoch, lr, epoch_loss / static_cast<double>(seen)};
    result.curve.push_back(rec);
    curve << epoch_record_json(rec) << "\n";
    curve.flush();
    save_weights(model.store(), (fs::path(out_dir) / "checkpoint.lszw").string());
  }

  result.final_weights_path = (fs::path(out_dir) / "weights.lszw").string();
  result.curve_path = curve_path.string();
  save_weights(model.store(), result.final_weights_path);
  return result;
}

}  // namespace lszone
