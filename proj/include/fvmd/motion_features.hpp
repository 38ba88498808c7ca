#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fvmd/tracking.hpp"

namespace fvmd {

enum class FieldKind { velocity, acceleration };

// F x N x 2 per-point differences, pixels/frame or pixels/frame^2. Row 0 is
// the zero padding that keeps the field the same shape as the trajectory.
struct VectorField {
  int frames = 0;
  int points = 0;
  FieldKind kind = FieldKind::velocity;
  std::vector<double> values;  // frame-major, point, then x,y

  VectorField() = default;
  VectorField(int f, int n, FieldKind k)
      : frames(f), points(n), kind(k),
        values(static_cast<std::size_t>(f) * n * 2, 0.0) {}

  double x(int t, int j) const { return values[(static_cast<std::size_t>(t) * points + j) * 2]; }
  double y(int t, int j) const { return values[(static_cast<std::size_t>(t) * points + j) * 2 + 1]; }
  void set(int t, int j, double vx, double vy) {
    values[(static_cast<std::size_t>(t) * points + j) * 2] = vx;
    values[(static_cast<std::size_t>(t) * points + j) * 2 + 1] = vy;
  }
};

// Magnitudes clipped to [0, 255]; angles in [0, 2pi), zero vectors pinned to
// angle 0.
struct PolarField {
  int frames = 0;
  int points = 0;
  std::vector<double> mag, angle;  // frame-major, F x N each
};

struct QuantizedField {
  int frames = 0;
  int points = 0;
  std::vector<std::uint8_t> mag_bin;    // 0..8
  std::vector<std::uint8_t> angle_bin;  // 0..7
};

struct VolumeSpec {
  int f = 4;  // frames per temporal chunk
  int k = 5;  // grid points per spatial block side
};

enum class FeatureFields { velocity, acceleration, combined };
enum class HistKind { h1d, h2d };

struct FeatureConfig {
  FeatureFields fields = FeatureFields::combined;
  HistKind hist = HistKind::h1d;
  VolumeSpec spec;
  // Sum raw clipped magnitudes instead of quantized ones in the 1D
  // histogram. Off by default.
  bool raw_magnitude_1d = false;
};

struct MotionFeature {
  FeatureFields fields = FeatureFields::combined;
  HistKind hist = HistKind::h1d;
  std::vector<float> data;
};

VectorField velocity_field(const TrajectorySet& traj);
VectorField acceleration_field(const VectorField& vel);
PolarField polar_decompose(const VectorField& field);
QuantizedField quantize(const PolarField& polar);

// Per spatio-temporal volume (f frames by k x k block of ORIGINAL grid
// positions), flattened temporal-major then spatial row-major.
// 2D: 72 joint bins per volume, indexed angle_bin * 9 + mag_bin, holding
// vector counts. 1D: 8 bins per volume, bin a summing the quantized
// magnitudes of vectors with angle_bin a.
MotionFeature histogram_2d(const QuantizedField& q, int grid_side,
                           int frames_per_clip, const VolumeSpec& spec);
MotionFeature histogram_1d(const QuantizedField& q, int grid_side,
                           int frames_per_clip, const VolumeSpec& spec);
// Raw-magnitude variant of the 1D histogram.
MotionFeature histogram_1d_raw(const QuantizedField& q, const PolarField& polar,
                               int grid_side, int frames_per_clip,
                               const VolumeSpec& spec);

// velocity feature concatenated before the acceleration feature when
// fields = combined.
MotionFeature extract_feature(const TrajectorySet& traj, const FeatureConfig& cfg);

std::size_t feature_length(int frames_per_clip, int grid_side,
                           const FeatureConfig& cfg);

// FVMDFEAT matrix container (little-endian): magic "FVMDFEAT", version u32,
// rows u32, cols u32, float32 row-major.
void export_features(const std::vector<MotionFeature>& feats,
                     const std::filesystem::path& path);
std::vector<MotionFeature> import_features(const std::filesystem::path& path);

}  // namespace fvmd
