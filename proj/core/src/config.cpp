// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lszone/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

using json = nlohmann::ordered_json;

namespace lszone {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& section) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument("config: unknown key \"" + it.key() +
                                  "\" in section " + section);
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

CliConfig CliConfig::from_json_text(const std::string& text) {
  CliConfig c;
  const json j = json::parse(text);
  reject_unknown(j, {"stft", "model", "train", "simulate", "bench"}, "(root)");

  if (j.contains("stft")) {
    const auto& s = j.at("stft");
    reject_unknown(s, {"sample_rate", "win_len", "hop", "fft_size"}, "stft");
    get_if(s, "sample_rate", c.model.stft.sample_rate);
    get_if(s, "win_len", c.model.stft.win_len);
    get_if(s, "hop", c.model.stft.hop);
    get_if(s, "fft_size", c.model.stft.fft_size);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown(m,
                   {"zones", "n_mel", "hidden", "hidden_units", "blocks",
                    "encoder_kernel", "squeezer_kernel", "gate_kernel",
                    "crossband_kernel", "crossband_groups", "gate_mode",
                    "mel_fmin", "mel_fmax", "seed"},
                   "model");
    get_if(m, "zones", c.model.zones);
    get_if(m, "n_mel", c.model.n_mel);
    get_if(m, "hidden", c.model.hidden);
    get_if(m, "hidden_units", c.model.hidden_units);
    get_if(m, "blocks", c.model.blocks);
    get_if(m, "encoder_kernel", c.model.encoder_kernel);
    get_if(m, "squeezer_kernel", c.model.squeezer_kernel);
    get_if(m, "gate_kernel", c.model.gate_kernel);
    get_if(m, "crossband_kernel", c.model.crossband_kernel);
    get_if(m, "crossband_groups", c.model.crossband_groups);
    get_if(m, "mel_fmin", c.model.mel_fmin);
    get_if(m, "mel_fmax", c.model.mel_fmax);
    get_if(m, "seed", c.model_seed);
    if (m.contains("gate_mode"))
      c.model.gate_mode = gate_mode_from_string(m.at("gate_mode").get<std::string>());
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown(t,
                   {"lr0", "lr_decay", "batch_size", "epochs", "clip_seconds",
                    "seed", "adam_beta1", "adam_beta2", "adam_eps"},
                   "train");
    get_if(t, "lr0", c.train.lr0);
    get_if(t, "lr_decay", c.train.lr_decay);
    get_if(t, "batch_size", c.train.batch_size);
    get_if(t, "epochs", c.train.epochs);
    get_if(t, "clip_seconds", c.train.clip_seconds);
    get_if(t, "seed", c.train.seed);
    get_if(t, "adam_beta1", c.train.adam_beta1);
    get_if(t, "adam_beta2", c.train.adam_beta2);
    get_if(t, "adam_eps", c.train.adam_eps);
  }
  if (j.contains("simulate")) {
    const auto& s = j.at("simulate");
    reject_unknown(s,
                   {"count", "seed", "split", "clip_seconds", "rt60_min",
                    "rt60_max", "sir_min", "sir_max", "snr_min", "snr_max",
                    "source_mode", "wav_dir", "float32", "threads"},
                   "simulate");
    get_if(s, "count", c.simulate.count);
    get_if(s, "seed", c.simulate.seed);
    get_if(s, "split", c.simulate.split);
    get_if(s, "clip_seconds", c.simulate.clip_seconds);
    get_if(s, "rt60_min", c.simulate.rt60_min);
    get_if(s, "rt60_max", c.simulate.rt60_max);
    get_if(s, "sir_min", c.simulate.sir_min);
    get_if(s, "sir_max", c.simulate.sir_max);
    get_if(s, "snr_min", c.simulate.snr_min);
    get_if(s, "snr_max", c.simulate.snr_max);
    get_if(s, "source_mode", c.simulate.source_mode);
    get_if(s, "wav_dir", c.simulate.wav_dir);
    get_if(s, "float32", c.simulate.float32);
    get_if(s, "threads", c.simulate.threads);
  }
  if (j.contains("bench")) {
    const auto& b = j.at("bench");
    reject_unknown(b, {"duration_seconds", "repeats", "warmup"}, "bench");
    get_if(b, "duration_seconds", c.bench.duration_seconds);
    get_if(b, "repeats", c.bench.repeats);
    get_if(b, "warmup", c.bench.warmup);
  }
  return c;
}

CliConfig CliConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string CliConfig::to_json_text() const {
  json j;
  j["stft"] = {{"sample_rate", model.stft.sample_rate},
               {"win_len", model.stft.win_len},
               {"hop", model.stft.hop},
               {"fft_size", model.stft.fft_size}};
  j["model"] = {{"zones", model.zones},
                {"n_mel", model.n_mel},
                {"hidden", model.hidden},
                {"hidden_units", model.hidden_units},
                {"blocks", model.blocks},
                {"encoder_kernel", model.encoder_kernel},
                {"squeezer_kernel", model.squeezer_kernel},
                {"gate_kernel", model.gate_kernel},
                {"crossband_kernel", model.crossband_kernel},
                {"crossband_groups", model.crossband_groups},
                {"gate_mode", to_string(model.gate_mode)},
                {"mel_fmin", model.mel_fmin},
                {"mel_fmax", model.mel_fmax},
                {"seed", model_seed}};
  j["train"] = {{"lr0", train.lr0},
                {"lr_decay", train.lr_decay},
                {"batch_size", train.batch_size},
                {"epochs", train.epochs},
                {"clip_seconds", train.clip_seconds},
                {"seed", train.seed},
                {"adam_beta1", train.adam_beta1},
                {"adam_beta2", train.adam_beta2},
                {"adam_eps", train.adam_eps}};
  j["simulate"] = {{"count", simulate.count},
                   {"seed", simulate.seed},
                   {"split", simulate.split},
                   {"clip_seconds", simulate.clip_seconds},
                   {"rt60_min", simulate.rt60_min},
                   {"rt60_max", simulate.rt60_max},
                   {"sir_min", simulate.sir_min},
                   {"sir_max", simulate.sir_max},
                   {"snr_min", simulate.snr_min},
                   {"snr_max", simulate.snr_max},
                   {"source_mode", simulate.source_mode},
                   {"wav_dir", simulate.wav_dir},
                   {"float32", simulate.float32},
                   {"threads", simulate.threads}};
  j["bench"] = {{"duration_seconds", bench.duration_seconds},
                {"repeats", bench.repeats},
                {"warmup", bench.warmup}};
  return j.dump(2);
}

}  // namespace lszone
