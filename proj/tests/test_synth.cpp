#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "fvmd/errors.hpp"
#include "fvmd/synth.hpp"

namespace fs = std::filesystem;
using fvmd::FrameSequence;
using fvmd::SynthParams;

TEST_CASE("synthetic videos are deterministic per seed and id") {
  SynthParams p;
  p.frames = 4;
  p.seed = 99;
  const FrameSequence a = fvmd::synth_video("v0", p);
  const FrameSequence b = fvmd::synth_video("v0", p);
  const FrameSequence c = fvmd::synth_video("v1", p);
  REQUIRE(a.length() == 4);
  CHECK(a.frames[0].data == b.frames[0].data);
  CHECK(a.frames[3].data == b.frames[3].data);
  CHECK(a.frames[0].data != c.frames[0].data);
  p.seed = 100;
  const FrameSequence d = fvmd::synth_video("v0", p);
  CHECK(a.frames[0].data != d.frames[0].data);
}

TEST_CASE("texture statistics sit near the configured mean and spread") {
  SynthParams p;
  p.frames = 1;
  p.seed = 5;
  const auto seq = fvmd::synth_video("v0", p);
  const auto& img = seq.frames[0];
  double mean = 0;
  for (auto v : img.data) mean += v;
  mean /= static_cast<double>(img.data.size());
  double var = 0;
  for (auto v : img.data) var += (v - mean) * (v - mean);
  var /= static_cast<double>(img.data.size());
  CHECK(std::abs(mean - 128.0) < 4.0);
  CHECK(std::abs(std::sqrt(var) - 40.0) < 6.0);
}

TEST_CASE("integer fixed velocity translates pixels exactly with wraparound") {
  SynthParams p;
  p.frames = 3;
  p.seed = 7;
  p.use_fixed_velocity = true;
  p.fixed_vx = 2;
  p.fixed_vy = -1;
  const auto seq = fvmd::synth_video("v0", p);
  const auto& f0 = seq.frames[0];
  for (int t = 1; t < 3; ++t) {
    const auto& ft = seq.frames[t];
    int mismatches = 0;
    for (int y = 0; y < 256; ++y) {
      for (int x = 0; x < 256; ++x) {
        const int sx = ((x - 2 * t) % 256 + 256) % 256;
        const int sy = ((y + t) % 256 + 256) % 256;
        mismatches += ft.at(x, y) != f0.at(sx, sy);
      }
    }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("motion law parsing") {
  CHECK(fvmd::parse_motion_law("const") == fvmd::MotionLaw::constant);
  CHECK(fvmd::parse_motion_law("constant") == fvmd::MotionLaw::constant);
  CHECK(fvmd::parse_motion_law("sine") == fvmd::MotionLaw::sine);
  CHECK(fvmd::parse_motion_law("walk") == fvmd::MotionLaw::walk);
  CHECK_THROWS_AS(fvmd::parse_motion_law("orbit"), fvmd::BadConfig);
}

TEST_CASE("laws move the content and stay deterministic") {
  for (auto law : {fvmd::MotionLaw::constant, fvmd::MotionLaw::sine, fvmd::MotionLaw::walk}) {
    SynthParams p;
    p.frames = 6;
    p.seed = 31;
    p.law = law;
    const auto a = fvmd::synth_video("m", p);
    const auto b = fvmd::synth_video("m", p);
    for (int t = 0; t < 6; ++t) CHECK(a.frames[t].data == b.frames[t].data);
    bool changed = false;
    for (int t = 1; t < 6 && !changed; ++t) changed = a.frames[t].data != a.frames[0].data;
    CHECK(changed);
  }
}

TEST_CASE("synth_dataset writes decodable videos in all formats") {
  for (const std::string format : {"png", "pgm", "ppm"}) {
    const fs::path dir = fs::temp_directory_path() / ("fvmd_synth_" + format);
    fs::remove_all(dir);
    SynthParams p;
    p.frames = 2;
    p.width = 32;
    p.height = 32;
    fvmd::synth_dataset(dir, 2, p, format);
    int videos = 0;
    for (const auto& sub : fs::directory_iterator(dir)) {
      ++videos;
      int frames = 0;
      for (const auto& f : fs::directory_iterator(sub)) {
        const auto img = fvmd::decode_image(f);
        CHECK(img.width == 32);
        ++frames;
      }
      CHECK(frames == 2);
    }
    CHECK(videos == 2);
  }
  CHECK_THROWS_AS(fvmd::synth_dataset(fs::temp_directory_path() / "fvmd_synth_bad",
                                      1, SynthParams{}, "gif"),
                  fvmd::BadConfig);
}
