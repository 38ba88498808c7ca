#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fvmd/frechet.hpp"
#include "fvmd/motion_features.hpp"
#include "fvmd/perturb.hpp"
#include "fvmd/synth.hpp"
#include "fvmd/tracking.hpp"
#include "fvmd/video_io.hpp"

namespace fvmd {

struct RunConfig {
  int frames_per_clip = 16;
  int stride = 1;
  int grid_n = 400;
  VolumeSpec volume;
  FeatureFields fields = FeatureFields::combined;
  HistKind hist = HistKind::h1d;
  std::string tracker = "builtin";  // "builtin" or "import"
  double eps = kDefaultEps;
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = one per hardware thread
  bool raw_magnitude_1d = false;
  LkParams lk;
};

void validate_config(const RunConfig& cfg);
FeatureConfig feature_config(const RunConfig& cfg);
ClipSpec clip_spec(const RunConfig& cfg);

// Runs fn(0..count-1) on a bounded pool; with one worker it degenerates to a
// plain loop. Results must be written to caller-owned slots indexed by i so
// ordering never depends on scheduling.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn);

// Per-clip features for one preprocessed grayscale video.
std::vector<MotionFeature> features_from_gray(const FrameSequence& gray,
                                              const RunConfig& cfg);
// Same over a set of videos, flattened in video order.
std::vector<MotionFeature> features_for_videos(
    const std::vector<FrameSequence>& gray_videos, const RunConfig& cfg);
// Generates count synthetic videos (ids v0000...) and extracts their
// features without keeping frames around.
std::vector<MotionFeature> features_for_synth(int count,
                                              const SynthParams& params,
                                              const RunConfig& cfg);
std::vector<MotionFeature> features_from_trajectories(
    const std::vector<TrajectorySet>& sets, const RunConfig& cfg);

// A compute source is a video-set directory or an FVMDTRAJ file.
bool is_trajectory_path(const std::filesystem::path& path);

struct FvmdReport;

// Per-clip features for either source kind; stage timings are accumulated
// into the report when one is given.
std::vector<MotionFeature> features_for_source(const std::filesystem::path& src,
                                               const RunConfig& cfg,
                                               FvmdReport* report);

inline constexpr const char* kLibraryVersion = "1.0.0";

struct FvmdReport {
  FvmdScore score;
  std::size_t gen_clips = 0;
  std::size_t ref_clips = 0;
  double t_load = 0.0;  // seconds; loading/decoding or trajectory import
  double t_track = 0.0;
  double t_features = 0.0;
  double t_frechet = 0.0;
  double t_total = 0.0;
};

FvmdReport compute_between_sources(const std::filesystem::path& gen,
                                   const std::filesystem::path& ref,
                                   const RunConfig& cfg);

// Tracks every clip of every video in a set directory.
std::vector<TrajectorySet> track_video_set(const std::filesystem::path& dir,
                                           const RunConfig& cfg);

struct SanityRow {
  int size = 0;
  int repeat = 0;
  std::string comparison;  // "same" or "cross"
  double score = 0.0;
};

// Disjoint subset pairs of pool_a per (size, repeat) scored against each
// other; with pool_b present, the first subset is also scored against a
// pool_b subset of the same size.
std::vector<SanityRow> sanity_rows(const std::vector<MotionFeature>& pool_a,
                                   const std::vector<MotionFeature>* pool_b,
                                   const std::vector<int>& sizes, int repeats,
                                   double eps, std::uint64_t seed);

struct SensitivityRow {
  std::string kind;
  double intensity = 0.0;
  double score = 0.0;
};

// For each noise kind: a zero-intensity row (clean scored against itself),
// then the preset intensities ascending, each scored against the clean set.
std::vector<SensitivityRow> sensitivity_rows(
    const std::vector<FrameSequence>& gray_clean,
    const std::vector<NoiseKind>& kinds, const RunConfig& cfg);

namespace detail {

struct FrameRef {
  int video = 0;
  int frame = 0;
};
using VideoPlan = std::vector<FrameRef>;

// Frame-reference plans equivalent to applying the noise ops to the whole
// set; lets the pipeline assemble perturbed videos one at a time. Swap plans
// use per-video seeds derived from (seed, video id).
std::vector<VideoPlan> noise_plan(const std::vector<FrameSequence>& videos,
                                  NoiseKind kind, double intensity,
                                  std::uint64_t seed);

}  // namespace detail

}  // namespace fvmd
