// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lszone/wav.hpp"
#include "test_util.hpp"

using namespace lszone;
namespace tu = lszone::testutil;
namespace fs = std::filesystem;

namespace {
fs::path tmp_file(const char* name) {
  auto dir = fs::temp_directory_path() / "lszone_wav_tests";
  fs::create_directories(dir);
  return dir / name;
}
}  // namespace

TEST_CASE("wav: float32 write/read round trip is bit-identical") {
  auto path = tmp_file("rt_f32.wav");
  std::vector<std::vector<double>> x;
  for (int c = 0; c < 6; ++c) {
    auto w = tu::random_wave(777, 50 + c);
    for (auto& s : w) s = static_cast<double>(static_cast<float>(s));
    x.push_back(std::move(w));
  }
  write_wav(path.string(), x, 16000, true);
  auto back = read_wav(path.string());
  REQUIRE(back.samples.size() == 6);
  REQUIRE(back.samples[0].size() == 777);
  for (int c = 0; c < 6; ++c)
    for (size_t i = 0; i < 777; ++i) CHECK(back.samples[c][i] == x[c][i]);
}

TEST_CASE("wav: pcm16 obeys the symmetric 32768 scaling with clamp") {
  auto path = tmp_file("rt_pcm.wav");
  std::vector<double> x = {0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 1.0 / 32768.0};
  write_wav(path.string(), {x}, 16000, false);
  auto back = read_wav(path.string());
  CHECK(back.samples[0][0] == 0.0);
  CHECK(back.samples[0][1] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(back.samples[0][2] == doctest::Approx(-0.5).epsilon(1e-4));
  CHECK(back.samples[0][3] == doctest::Approx(32767.0 / 32768.0));  // clamped top
  CHECK(back.samples[0][4] == -1.0);
  CHECK(back.samples[0][5] == doctest::Approx(32767.0 / 32768.0));
  CHECK(back.samples[0][6] == -1.0);
  CHECK(back.samples[0][7] == doctest::Approx(1.0 / 32768.0));
  for (double v : back.samples[0]) {
    CHECK(v >= -1.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("wav: wrong sample rate is rejected with the expected message") {
  auto path = tmp_file("rate44.wav");
  write_wav(path.string(), {std::vector<double>(100, 0.1)}, 44100, true);
  CHECK_THROWS_WITH_AS(read_wav(path.string()),
                       doctest::Contains("expected 16000 Hz"), std::runtime_error);
}

TEST_CASE("wav: malformed header reports a byte offset") {
  auto path = tmp_file("bad.wav");
  std::ofstream f(path, std::ios::binary);
  f << "RIFXjunkWAVE";
  f.close();
  CHECK_THROWS_WITH_AS(read_wav(path.string()), doctest::Contains("at byte 0"),
                       std::runtime_error);
}

TEST_CASE("wav: six-channel pcm16 keeps channel interleaving straight") {
  auto path = tmp_file("six.wav");
  std::vector<std::vector<double>> x(6, std::vector<double>(32, 0.0));
  for (int c = 0; c < 6; ++c)
    for (int i = 0; i < 32; ++i) x[c][i] = (c + 1) * 0.1;
  write_wav(path.string(), x, 16000, false);
  auto back = read_wav(path.string());
  REQUIRE(back.samples.size() == 6);
  for (int c = 0; c < 6; ++c)
    CHECK(back.samples[c][10] == doctest::Approx((c + 1) * 0.1).epsilon(1e-3));
}
