#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fvmd/video_io.hpp"

namespace fvmd {

enum class MotionLaw { constant, sine, walk };

MotionLaw parse_motion_law(const std::string& name);
std::string motion_law_name(MotionLaw law);

// Band-limited periodic texture rigidly translated with toroidal wraparound.
// Per-video texture and motion parameters are drawn from a stream derived
// from (seed, id), so any video can be regenerated independently.
struct SynthParams {
  int width = 256;
  int height = 256;
  int frames = 16;
  MotionLaw law = MotionLaw::constant;
  std::uint64_t seed = 0;

  int texture_waves = 24;       // cosine components per texture
  double min_wave_radius = 3.0;  // integer frequency radius bounds
  double max_wave_radius = 20.0;
  double texture_std = 40.0;    // target intensity spread around 128

  double min_speed = 0.5;  // constant law, pixels/frame
  double max_speed = 2.5;
  double min_amp = 4.0;  // sine law
  double max_amp = 12.0;
  double min_omega = 0.3;
  double max_omega = 0.9;
  double max_peak_speed = 3.0;  // resample sine draws until A*omega fits
  double walk_sigma = 1.5;      // random walk step, pixels/frame per axis

  // Per-video contrast scale drawn from this range; [1, 1] disables it.
  double contrast_min = 1.0;
  double contrast_max = 1.0;

  // Pin the translation instead of drawing from the law.
  bool use_fixed_velocity = false;
  double fixed_vx = 0.0;
  double fixed_vy = 0.0;
};

// One grayscale video. Deterministic in (params.seed, id).
FrameSequence synth_video(const std::string& id, const SynthParams& params);

// Writes `count` videos into set_dir/v0000, v0001, ... with zero-padded
// frame filenames; format is "png", "pgm" or "ppm".
void synth_dataset(const std::filesystem::path& set_dir, int count,
                   const SynthParams& params, const std::string& format);

}  // namespace fvmd
