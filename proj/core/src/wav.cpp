// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lszone/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace lszone {

namespace {

[[noreturn]] void bad(const std::string& path, size_t offset, const std::string& what) {
  throw std::runtime_error("wav parse error in " + path + " at byte " +
                           std::to_string(offset) + ": " + what);
}

uint32_t rd_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t rd_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::string& s, uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}
void wr_u16(std::string& s, uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

WavData read_wav(const std::string& path, int expect_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  const uint8_t* p = reinterpret_cast<const uint8_t*>(buf.data());
  const size_t n = buf.size();

  if (n < 12) bad(path, n, "file shorter than RIFF header");
  if (std::memcmp(p, "RIFF", 4) != 0) bad(path, 0, "missing RIFF tag");
  if (std::memcmp(p + 8, "WAVE", 4) != 0) bad(path, 8, "missing WAVE tag");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t data_off = 0, data_len = 0;
  bool have_fmt = false;

  size_t off = 12;
  while (off + 8 <= n) {
    const char* tag = buf.data() + off;
    uint32_t len = rd_u32(p + off + 4);
    size_t body = off + 8;
    if (body + len > n) bad(path, off, "chunk overruns file");
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (len < 16) bad(path, off, "fmt chunk too small");
      format = rd_u16(p + body);
      channels = rd_u16(p + body + 2);
      rate = rd_u32(p + body + 4);
      bits = rd_u16(p + body + 14);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data_off = body;
      data_len = len;
    }
    off = body + len + (len & 1);  // chunks are word-aligned
  }

  if (!have_fmt) bad(path, n, "no fmt chunk");
  if (data_off == 0) bad(path, n, "no data chunk");
  if (channels == 0) bad(path, data_off, "zero channels");
  if (expect_rate > 0 && rate != static_cast<uint32_t>(expect_rate))
    throw std::runtime_error(path + ": expected " + std::to_string(expect_rate) +
                             " Hz, got " + std::to_string(rate));

  WavData out;
  out.sample_rate = static_cast<int>(rate);

  if (format == 1 && bits == 16) {
    const size_t frames = data_len / (2 * channels);
    out.samples.assign(channels, std::vector<double>(frames));
    for (size_t i = 0; i < frames; ++i)
      for (int c = 0; c < channels; ++c) {
        int16_t v;
        std::memcpy(&v, p + data_off + (i * channels + c) * 2, 2);
        out.samples[c][i] = static_cast<double>(v) / 32768.0;
      }
  } else if (format == 3 && bits == 32) {
    const size_t frames = data_len / (4 * channels);
    out.samples.assign(channels, std::vector<double>(frames));
    for (size_t i = 0; i < frames; ++i)
      for (int c = 0; c < channels; ++c) {
        float v;
        std::memcpy(&v, p + data_off + (i * channels + c) * 4, 4);
        out.samples[c][i] = static_cast<double>(v);
      }
  } else {
    bad(path, data_off, "unsupported format (need PCM16 or float32), format=" +
                            std::to_string(format) + " bits=" + std::to_string(bits));
  }
  return out;
}

void write_wav(const std::string& path, const std::vector<std::vector<double>>& samples,
               int sample_rate, bool float32) {
  if (samples.empty()) throw std::invalid_argument("write_wav: no channels");
  const size_t frames = samples[0].size();
  for (const auto& ch : samples)
    if (ch.size() != frames) throw std::invalid_argument("write_wav: ragged channels");

  const uint16_t channels = static_cast<uint16_t>(samples.size());
  const uint16_t bytes_per = float32 ? 4 : 2;
  const uint32_t data_len = static_cast<uint32_t>(frames * channels * bytes_per);

  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  wr_u32(out, 36 + data_len);
  out += "WAVE";
  out += "fmt ";
  wr_u32(out, 16);
  wr_u16(out, float32 ? 3 : 1);
  wr_u16(out, channels);
  wr_u32(out, static_cast<uint32_t>(sample_rate));
  wr_u32(out, static_cast<uint32_t>(sample_rate) * channels * bytes_per);
  wr_u16(out, static_cast<uint16_t>(channels * bytes_per));
  wr_u16(out, static_cast<uint16_t>(bytes_per * 8));
  out += "data";
  wr_u32(out, data_len);

  if (float32) {
    for (size_t i = 0; i < frames; ++i)
      for (int c = 0; c < channels; ++c) {
        float v = static_cast<float>(samples[c][i]);
        char b[4];
        std::memcpy(b, &v, 4);
        out.append(b, 4);
      }
  } else {
    for (size_t i = 0; i < frames; ++i)
      for (int c = 0; c < channels; ++c) {
        double scaled = samples[c][i] * 32768.0;
        int32_t q = static_cast<int32_t>(std::lrint(scaled));
        q = std::clamp(q, -32768, 32767);
        int16_t v = static_cast<int16_t>(q);
        char b[2];
        std::memcpy(b, &v, 2);
        out.append(b, 2);
      }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("short write to " + path);
}

}  // namespace lszone
