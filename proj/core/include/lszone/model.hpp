// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Full model: SpaIEC front-end -> encoder Conv1D over mel -> M stacked
// Conv-GRU CNP blocks -> linear decoder, plus phase-reusing reconstruction,
// offline and block-streaming inference.
//
// The offline and streaming paths run the same per-frame arithmetic in the
// same order, so their outputs agree bit for bit; the streaming output lags
// the input by exactly win_len - hop samples (one hop of algorithmic latency).

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "lszone/cnp.hpp"
#include "lszone/ipd.hpp"
#include "lszone/mel.hpp"
#include "lszone/model_config.hpp"
#include "lszone/spaiec.hpp"
#include "lszone/stft.hpp"

namespace lszone {

template <typename T>
struct ModelCache {
  MelFeature<T> x_mel;
  IpdTensor<T> ipd;
  IpdFeature<T> ipd_feat;
  MelFeature<T> xs;
  SpaiecCache<T> spaiec;
  Tensor3<T> enc_in;                    // [Z x n_mel x T]
  std::vector<Tensor3<T>> block_io;     // [0]=encoder out, [i+1]=block i out
  std::vector<CnpBlockCache<T>> blocks;
};

// unit phasor of a complex value; zero maps to (1, 0)
template <typename T>
inline void unit_phasor(const std::complex<T>& c, T& re, T& im) {
  const T mag = std::abs(c);
  if (mag > T(0)) {
    re = c.real() / mag;
    im = c.imag() / mag;
  } else {
    re = T(1);
    im = T(0);
  }
}

template <typename T>
class LSZoneModel {
 public:
  explicit LSZoneModel(const ModelConfig& cfg, uint64_t seed)
      : cfg_(cfg),
        store_(seed),
        fft_(cfg.stft.fft_size),
        window_(periodic_hann<T>(cfg.stft.win_len)) {
    cfg_.validate();
    fb_ = mel_filterbank<T>(cfg_.stft.bins(), cfg_.n_mel, cfg_.stft.sample_rate,
                            cfg_.mel_fmin, cfg_.mel_fmax);
    fb_inv_ = mel_inverse(fb_);
    spaiec_ = register_spaiec(store_, cfg_);
    enc_spec_ = ConvSpec{.in_ch = cfg_.zones, .out_ch = cfg_.hidden,
                         .kernel = cfg_.encoder_kernel, .groups = 1,
                         .axis = ConvAxis::Band, .pad = ConvPad::Same};
    enc_w_ = store_.add("encoder.w", enc_spec_.weight_dims(),
                        enc_spec_.in_per_group() * enc_spec_.kernel);
    enc_b_ = store_.add("encoder.b", {cfg_.hidden}, 0);
    for (int i = 0; i < cfg_.blocks; ++i)
      blocks_.push_back(register_cnp_block(store_, cfg_, "cnp." + std::to_string(i)));
    dec_w_ = store_.add("decoder.w", {cfg_.hidden, cfg_.zones}, cfg_.hidden);
    dec_b_ = store_.add("decoder.b", {cfg_.zones}, 0);
  }

  const ModelConfig& config() const { return cfg_; }
  ParamStore<T>& store() { return store_; }
  const ParamStore<T>& store() const { return store_; }
  size_t param_count() const { return store_.param_count(); }
  const MelFilterbank<T>& filterbank() const { return fb_; }
  const std::vector<T>& filterbank_inverse() const { return fb_inv_; }

  // ---------------------------------------------------------------- offline

  MelFeature<T> forward_offline(const ComplexSpectrogram<T>& X,
                                ModelCache<T>* cache = nullptr) const {
    if (X.channels != cfg_.zones)
      throw std::invalid_argument("model: channel mismatch, expected " +
                                  std::to_string(cfg_.zones) + " got " +
                                  std::to_string(X.channels));
    if (X.bins != cfg_.stft.bins())
      throw std::invalid_argument("model: bin count mismatch");

    MelFeature<T> x_mel = apply_mel(X, fb_);
    IpdTensor<T> ipd = compute_ipd(X);
    IpdFeature<T> ipd_feat =
        squeeze_ipd(ipd, spaiec_, store_, cache ? &cache->spaiec : nullptr);
    MelFeature<T> xs = gate_fuse(x_mel, ipd_feat, spaiec_, store_,
                                 cache ? &cache->spaiec : nullptr);

    const int Tn = X.frames;
    Tensor3<T> enc_in(cfg_.zones, cfg_.n_mel, Tn);
    for (int t = 0; t < Tn; ++t)
      for (int m = 0; m < cfg_.n_mel; ++m) {
        T* dst = enc_in.pos(m, t);
        for (int z = 0; z < cfg_.zones; ++z) dst[z] = xs.at(m, t, z);
      }

    std::vector<Tensor3<T>> local_io;
    std::vector<Tensor3<T>>& io = cache ? cache->block_io : local_io;
    io.clear();
    io.emplace_back();
    conv1d_forward(enc_in, enc_spec_, store_[enc_w_].value.data(),
                   store_[enc_b_].value.data(), io.back());

    if (cache) cache->blocks.resize(blocks_.size());
    CnpState<T> state =
        CnpState<T>::zeros(cfg_.blocks, cfg_.n_mel, cfg_.hidden_units);
    for (size_t i = 0; i < blocks_.size(); ++i) {
      Tensor3<T> out;
      cnp_forward(io.back(), blocks_[i], store_, state.h[i], out,
                  cache ? &cache->blocks[i] : nullptr);
      io.push_back(std::move(out));
    }

    const Tensor3<T>& dec_in = io.back();
    Tensor3<T> dec_out(cfg_.zones, cfg_.n_mel, Tn);
    linear_forward(dec_in.v.data(), cfg_.n_mel * Tn, cfg_.hidden, cfg_.zones,
                   store_[dec_w_].value.data(), store_[dec_b_].value.data(),
                   dec_out.v.data());

    MelFeature<T> y(cfg_.n_mel, Tn, cfg_.zones);
    for (int t = 0; t < Tn; ++t)
      for (int z = 0; z < cfg_.zones; ++z)
        for (int m = 0; m < cfg_.n_mel; ++m) y.at(m, t, z) = dec_out.at(z, m, t);

    if (cache) {
      cache->x_mel = std::move(x_mel);
      cache->ipd = std::move(ipd);
      cache->ipd_feat = std::move(ipd_feat);
      cache->xs = std::move(xs);
      cache->enc_in = std::move(enc_in);
    }
    return y;
  }

  // dL/dX_hat_mel -> parameter gradients (accumulated into the store)
  void backward(const ModelCache<T>& cache, const MelFeature<T>& grad_y) {
    const int Tn = grad_y.frames;
    Tensor3<T> d_dec_out(cfg_.zones, cfg_.n_mel, Tn);
    for (int t = 0; t < Tn; ++t)
      for (int z = 0; z < cfg_.zones; ++z)
        for (int m = 0; m < cfg_.n_mel; ++m)
          d_dec_out.at(z, m, t) = grad_y.at(m, t, z);

    const Tensor3<T>& dec_in = cache.block_io.back();
    Tensor3<T> dh(cfg_.hidden, cfg_.n_mel, Tn);
    linear_backward(dec_in.v.data(), cfg_.n_mel * Tn, cfg_.hidden, cfg_.zones,
                    store_[dec_w_].value.data(), d_dec_out.v.data(), dh.v.data(),
                    store_[dec_w_].grad.data(), store_[dec_b_].grad.data());

    for (int i = static_cast<int>(blocks_.size()) - 1; i >= 0; --i) {
      Tensor3<T> dprev;
      cnp_backward(cache.block_io[i], blocks_[i], store_, cache.blocks[i], dh,
                   dprev);
      dh = std::move(dprev);
    }

    Tensor3<T> d_enc_in(cfg_.zones, cfg_.n_mel, Tn);
    conv1d_backward(cache.enc_in, enc_spec_, store_[enc_w_].value.data(), dh,
                    &d_enc_in, store_[enc_w_].grad.data(),
                    store_[enc_b_].grad.data());

    MelFeature<T> d_xs(cfg_.n_mel, Tn, cfg_.zones);
    for (int t = 0; t < Tn; ++t)
      for (int m = 0; m < cfg_.n_mel; ++m) {
        const T* src = d_enc_in.pos(m, t);
        for (int z = 0; z < cfg_.zones; ++z) d_xs.at(m, t, z) = src[z];
      }
    spaiec_backward(cache.x_mel, cache.ipd_feat, spaiec_, store_, cache.spaiec,
                    d_xs);
  }

  // ----------------------------------------------------------- reconstruct

  // Negative mel entries clamp to zero; each zone reuses the phase of its own
  // input channel. Output covers (frames-1)*hop + win_len samples.
  std::vector<std::vector<T>> reconstruct(const MelFeature<T>& mel_hat,
                                          const ComplexSpectrogram<T>& phase_src) const {
    if (mel_hat.channels != cfg_.zones || phase_src.channels != cfg_.zones ||
        mel_hat.frames != phase_src.frames || mel_hat.n_mel != cfg_.n_mel)
      throw std::invalid_argument("reconstruct: shape mismatch");
    const int Tn = mel_hat.frames;
    const int F = cfg_.stft.bins();
    ComplexSpectrogram<T> recon(cfg_.zones, F, Tn, cfg_.stft);
    std::vector<T> mag(F);
    for (int z = 0; z < cfg_.zones; ++z)
      for (int t = 0; t < Tn; ++t) {
        mel_expand_frame(fb_inv_, F, cfg_.n_mel, mel_hat.vec(t, z), mag.data());
        const std::complex<T>* src = phase_src.spectrum(z, t);
        std::complex<T>* dst = recon.spectrum(z, t);
        for (int f = 0; f < F; ++f) {
          T re, im;
          unit_phasor(src[f], re, im);
          dst[f] = {mag[f] * re, mag[f] * im};
        }
      }
    return istft(recon, cfg_.stft);
  }

  // stft -> forward -> reconstruct; output length equals input length
  std::vector<std::vector<T>> separate(const std::vector<std::vector<T>>& wave) const {
    if (static_cast<int>(wave.size()) != cfg_.zones)
      throw std::invalid_argument("separate: expected " +
                                  std::to_string(cfg_.zones) + " channels");
    auto spec = stft(wave, cfg_.stft);
    auto mel_hat = forward_offline(spec);
    auto out = reconstruct(mel_hat, spec);
    for (auto& ch : out) ch.resize(wave[0].size(), T(0));
    return out;
  }

  // ------------------------------------------------------------- streaming

  struct StreamState {
    int blocks_seen = 0;
    std::vector<std::vector<T>> in_buf;   // [Z][win]
    std::vector<std::vector<T>> ola_num;  // [Z][win]
    std::vector<T> ola_den;               // [win]
    CnpState<T> cnp;
  };

  StreamState stream_init() const {
    StreamState s;
    s.in_buf.assign(cfg_.zones, std::vector<T>(cfg_.stft.win_len, T(0)));
    s.ola_num.assign(cfg_.zones, std::vector<T>(cfg_.stft.win_len, T(0)));
    s.ola_den.assign(cfg_.stft.win_len, T(0));
    s.cnp = CnpState<T>::zeros(cfg_.blocks, cfg_.n_mel, cfg_.hidden_units);
    return s;
  }

  // Feed one hop-sized block per channel, receive one hop-sized block per
  // zone. The emitted block covers input samples [(k-1)*hop, k*hop) when this
  // is the k-th call (zeros for k=0).
  void stream_step(StreamState& state, const std::vector<std::vector<T>>& block,
                   std::vector<std::vector<T>>& out) const {
    const int hop = cfg_.stft.hop;
    if (static_cast<int>(block.size()) != cfg_.zones)
      throw std::invalid_argument("stream: channel mismatch");
    for (const auto& ch : block)
      if (static_cast<int>(ch.size()) != hop)
        throw std::invalid_argument("stream: block size must equal hop (" +
                                    std::to_string(hop) + ")");

    for (int z = 0; z < cfg_.zones; ++z) {
      auto& buf = state.in_buf[z];
      std::copy(buf.begin() + hop, buf.end(), buf.begin());
      std::copy(block[z].begin(), block[z].end(), buf.end() - hop);
    }
    state.blocks_seen++;

    if (state.blocks_seen >= 2) process_frame(state);
    emit_block(state, out);
  }

  // Emits the final pending hop once the input stream has ended.
  void stream_flush(StreamState& state, std::vector<std::vector<T>>& out) const {
    emit_block(state, out);
  }

 private:
  void emit_block(StreamState& state, std::vector<std::vector<T>>& out) const {
    const int hop = cfg_.stft.hop;
    out.assign(cfg_.zones, std::vector<T>(hop, T(0)));
    for (int z = 0; z < cfg_.zones; ++z)
      for (int i = 0; i < hop; ++i)
        out[z][i] = state.ola_den[i] < T(1e-8)
                        ? T(0)
                        : state.ola_num[z][i] / state.ola_den[i];
    for (int z = 0; z < cfg_.zones; ++z) {
      auto& num = state.ola_num[z];
      std::copy(num.begin() + hop, num.end(), num.begin());
      std::fill(num.end() - hop, num.end(), T(0));
    }
    std::copy(state.ola_den.begin() + hop, state.ola_den.end(),
              state.ola_den.begin());
    std::fill(state.ola_den.end() - hop, state.ola_den.end(), T(0));
  }

  void process_frame(StreamState& state) const {
    const int F = cfg_.stft.bins();
    const int Z = cfg_.zones;
    const int M = cfg_.n_mel;

    std::vector<std::complex<T>> scratch(cfg_.stft.fft_size);
    std::vector<std::complex<T>> spectra(static_cast<size_t>(Z) * F);
    for (int z = 0; z < Z; ++z)
      stft_frame(state.in_buf[z].data(), window_, fft_, scratch.data(),
                 spectra.data() + static_cast<size_t>(z) * F);

    // features
    MelFeature<T> x_mel(M, 1, Z);
    std::vector<T> mag(F);
    for (int z = 0; z < Z; ++z)
      apply_mel_frame(fb_, spectra.data() + static_cast<size_t>(z) * F,
                      x_mel.vec(0, z), mag.data());
    std::vector<T> phases(static_cast<size_t>(Z) * F);
    for (int z = 0; z < Z; ++z) {
      const std::complex<T>* s = spectra.data() + static_cast<size_t>(z) * F;
      T* p = phases.data() + static_cast<size_t>(z) * F;
      for (int f = 0; f < F; ++f) p[f] = std::atan2(s[f].imag(), s[f].real());
    }
    IpdTensor<T> ipd(Z, F, 1);
    compute_ipd_frame(phases.data(), Z, F, ipd.v.data());

    IpdFeature<T> ipd_feat = squeeze_ipd(ipd, spaiec_, store_, nullptr);
    MelFeature<T> xs = gate_fuse(x_mel, ipd_feat, spaiec_, store_, nullptr);

    Tensor3<T> enc_in(Z, M, 1);
    for (int m = 0; m < M; ++m) {
      T* dst = enc_in.pos(m, 0);
      for (int z = 0; z < Z; ++z) dst[z] = xs.at(m, 0, z);
    }
    Tensor3<T> h;
    conv1d_forward(enc_in, enc_spec_, store_[enc_w_].value.data(),
                   store_[enc_b_].value.data(), h);
    for (size_t i = 0; i < blocks_.size(); ++i) {
      Tensor3<T> out;
      cnp_forward(h, blocks_[i], store_, state.cnp.h[i], out, nullptr);
      h = std::move(out);
    }
    Tensor3<T> dec_out(Z, M, 1);
    linear_forward(h.v.data(), M, cfg_.hidden, Z, store_[dec_w_].value.data(),
                   store_[dec_b_].value.data(), dec_out.v.data());

    // synthesize and overlap-add
    const int win = cfg_.stft.win_len;
    std::vector<T> mel_vec(M), frame(cfg_.stft.fft_size);
    std::vector<std::complex<T>> recon(F);
    for (int z = 0; z < Z; ++z) {
      for (int m = 0; m < M; ++m) mel_vec[m] = dec_out.at(z, m, 0);
      mel_expand_frame(fb_inv_, F, M, mel_vec.data(), mag.data());
      const std::complex<T>* src = spectra.data() + static_cast<size_t>(z) * F;
      for (int f = 0; f < F; ++f) {
        T re, im;
        unit_phasor(src[f], re, im);
        recon[f] = {mag[f] * re, mag[f] * im};
      }
      istft_frame(recon.data(), fft_, scratch.data(), frame.data());
      auto& num = state.ola_num[z];
      for (int i = 0; i < win; ++i) num[i] += window_[i] * frame[i];
    }
    for (int i = 0; i < win; ++i) state.ola_den[i] += window_[i] * window_[i];
  }

  ModelConfig cfg_;
  ParamStore<T> store_;
  Fft<T> fft_;
  std::vector<T> window_;
  MelFilterbank<T> fb_;
  std::vector<T> fb_inv_;
  SpaiecParams spaiec_;
  ConvSpec enc_spec_;
  int enc_w_ = -1, enc_b_ = -1;
  std::vector<CnpBlockParams> blocks_;
  int dec_w_ = -1, dec_b_ = -1;
};

}  // namespace lszone
