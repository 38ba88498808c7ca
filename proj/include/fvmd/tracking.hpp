#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fvmd/video_io.hpp"

namespace fvmd {

struct QueryGrid {
  int n = 0;
  int grid_side = 0;
  std::vector<float> xy;  // interleaved x,y; row-major, x varying fastest

  float x(int j) const { return xy[2 * j]; }
  float y(int j) const { return xy[2 * j + 1]; }
};

enum class TrajectorySource { imported, builtin_lk };

// One clip's tracked coordinates: frames * points * 2 floats, frame-major,
// point row-major within a frame, x before y. This is also the payload
// layout of the trajectory file format.
struct TrajectorySet {
  int frames = 0;
  int points = 0;
  int grid_side = 0;
  TrajectorySource source = TrajectorySource::builtin_lk;
  std::string source_id;
  int start_frame = 0;
  std::vector<float> coords;

  TrajectorySet() = default;
  TrajectorySet(int f, int n, int g)
      : frames(f), points(n), grid_side(g),
        coords(static_cast<std::size_t>(f) * n * 2) {}

  float x(int t, int j) const { return coords[(static_cast<std::size_t>(t) * points + j) * 2]; }
  float y(int t, int j) const { return coords[(static_cast<std::size_t>(t) * points + j) * 2 + 1]; }
  void set(int t, int j, float px, float py) {
    coords[(static_cast<std::size_t>(t) * points + j) * 2] = px;
    coords[(static_cast<std::size_t>(t) * points + j) * 2 + 1] = py;
  }
};

struct LkParams {
  int pyramid_levels = 3;
  int window_radius = 7;
  int max_iterations = 30;
  double convergence_epsilon = 0.01;  // pixels
  // Structure-tensor gate for the constant-velocity fallback: a window is
  // degenerate when min-eigenvalue / window-area drops below this, with
  // intensities on the 0..255 scale.
  double min_eigenvalue = 1e-3;
};

// Cell centers of a g x g partition, g = sqrt(N): x_i = (i + 0.5) * w / g,
// row-major with x varying fastest.
QueryGrid init_grid(int n, int width, int height);

// Pyramidal Lucas-Kanade from each frame to the next, re-initialized at the
// clip's first frame. Windows whose structure tensor is degenerate carry the
// point's previous displacement forward. Always returns finite coordinates.
TrajectorySet track_builtin(const Clip& clip, const QueryGrid& grid,
                            const LkParams& params);

// Same tracker over every clip window of one grayscale sequence, sharing the
// per-frame image pyramids across overlapping clips.
std::vector<TrajectorySet> track_video(const FrameSequence& gray,
                                       const std::vector<int>& starts,
                                       int frames_per_clip,
                                       const QueryGrid& grid,
                                       const LkParams& params);

// FVMDTRAJ container (little-endian): magic "FVMDTRAJ", version u32 = 1,
// clip_count u32, F u32, N u32, then clip_count * F * N * 2 float32 values.
// A JSON index mapping clip -> {video id, start frame} is written next to
// the binary file at path + ".json".
void export_trajectories(const std::vector<TrajectorySet>& sets,
                         const std::filesystem::path& path);
std::vector<TrajectorySet> import_trajectories(const std::filesystem::path& path);

}  // namespace fvmd
