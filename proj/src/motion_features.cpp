#include "fvmd/motion_features.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "fvmd/errors.hpp"

namespace fvmd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kBinWidth = kTwoPi / 8.0;

void check_volume(const QuantizedField& q, int grid_side, int frames_per_clip,
                  const VolumeSpec& spec) {
  if (spec.f < 1 || spec.k < 1) throw BadVolumeSpec("volume sides must be positive");
  if (q.frames != frames_per_clip) {
    throw BadVolumeSpec("field has " + std::to_string(q.frames) +
                        " frames, expected " + std::to_string(frames_per_clip));
  }
  if (grid_side * grid_side != q.points) {
    throw BadVolumeSpec("field size does not match the query grid");
  }
  if (frames_per_clip % spec.f != 0) {
    throw BadVolumeSpec("temporal chunk " + std::to_string(spec.f) +
                        " does not divide " + std::to_string(frames_per_clip));
  }
  if (grid_side % spec.k != 0) {
    throw BadVolumeSpec("block side " + std::to_string(spec.k) +
                        " does not divide grid side " + std::to_string(grid_side));
  }
}

// Flat volume index for frame t and original grid index j.
inline std::size_t volume_of(int t, int j, int grid_side, int gk, int f, int k) {
  const int tau = t / f;
  const int by = (j / grid_side) / k;
  const int bx = (j % grid_side) / k;
  return (static_cast<std::size_t>(tau) * gk + by) * gk + bx;
}

}  // namespace

VectorField velocity_field(const TrajectorySet& traj) {
  if (traj.frames < 2) throw TooShort("trajectory needs at least 2 frames");
  VectorField v(traj.frames, traj.points, FieldKind::velocity);
  for (int t = 1; t < traj.frames; ++t) {
    for (int j = 0; j < traj.points; ++j) {
      v.set(t, j,
            static_cast<double>(traj.x(t, j)) - static_cast<double>(traj.x(t - 1, j)),
            static_cast<double>(traj.y(t, j)) - static_cast<double>(traj.y(t - 1, j)));
    }
  }
  return v;
}

VectorField acceleration_field(const VectorField& vel) {
  if (vel.kind != FieldKind::velocity) {
    throw KindError("acceleration must be derived from a velocity field");
  }
  VectorField a(vel.frames, vel.points, FieldKind::acceleration);
  for (int t = 1; t < vel.frames; ++t) {
    for (int j = 0; j < vel.points; ++j) {
      a.set(t, j, vel.x(t, j) - vel.x(t - 1, j), vel.y(t, j) - vel.y(t - 1, j));
    }
  }
  return a;
}

PolarField polar_decompose(const VectorField& field) {
  PolarField p;
  p.frames = field.frames;
  p.points = field.points;
  const std::size_t n = static_cast<std::size_t>(field.frames) * field.points;
  p.mag.resize(n);
  p.angle.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = field.values[2 * i];
    const double y = field.values[2 * i + 1];
    const double rho = std::hypot(x, y);
    p.mag[i] = rho < 255.0 ? rho : 255.0;
    if (rho == 0.0) {
      p.angle[i] = 0.0;
    } else {
      double a = std::atan2(y, x);
      if (a < 0.0) a += kTwoPi;
      if (a >= kTwoPi) a = 0.0;
      p.angle[i] = a;
    }
  }
  return p;
}

QuantizedField quantize(const PolarField& polar) {
  QuantizedField q;
  q.frames = polar.frames;
  q.points = polar.points;
  const std::size_t n = polar.mag.size();
  q.mag_bin.resize(n);
  q.angle_bin.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // round half away from zero; log2(1+255) = 8 caps the top bin
    long b = std::lround(std::log2(1.0 + polar.mag[i]));
    if (b < 0) b = 0;
    if (b > 8) b = 8;
    q.mag_bin[i] = static_cast<std::uint8_t>(b);
    q.angle_bin[i] =
        static_cast<std::uint8_t>(static_cast<int>(polar.angle[i] / kBinWidth) & 7);
  }
  return q;
}

MotionFeature histogram_2d(const QuantizedField& q, int grid_side,
                           int frames_per_clip, const VolumeSpec& spec) {
  check_volume(q, grid_side, frames_per_clip, spec);
  const int gk = grid_side / spec.k;
  const int tchunks = frames_per_clip / spec.f;
  MotionFeature feat;
  feat.hist = HistKind::h2d;
  feat.data.assign(static_cast<std::size_t>(tchunks) * gk * gk * 72, 0.0f);
  for (int t = 0; t < q.frames; ++t) {
    for (int j = 0; j < q.points; ++j) {
      const std::size_t vol = volume_of(t, j, grid_side, gk, spec.f, spec.k);
      const std::size_t i = static_cast<std::size_t>(t) * q.points + j;
      feat.data[vol * 72 + q.angle_bin[i] * 9 + q.mag_bin[i]] += 1.0f;
    }
  }
  return feat;
}

MotionFeature histogram_1d(const QuantizedField& q, int grid_side,
                           int frames_per_clip, const VolumeSpec& spec) {
  check_volume(q, grid_side, frames_per_clip, spec);
  const int gk = grid_side / spec.k;
  const int tchunks = frames_per_clip / spec.f;
  MotionFeature feat;
  feat.hist = HistKind::h1d;
  feat.data.assign(static_cast<std::size_t>(tchunks) * gk * gk * 8, 0.0f);
  for (int t = 0; t < q.frames; ++t) {
    for (int j = 0; j < q.points; ++j) {
      const std::size_t vol = volume_of(t, j, grid_side, gk, spec.f, spec.k);
      const std::size_t i = static_cast<std::size_t>(t) * q.points + j;
      feat.data[vol * 8 + q.angle_bin[i]] += static_cast<float>(q.mag_bin[i]);
    }
  }
  return feat;
}

MotionFeature histogram_1d_raw(const QuantizedField& q, const PolarField& polar,
                               int grid_side, int frames_per_clip,
                               const VolumeSpec& spec) {
  check_volume(q, grid_side, frames_per_clip, spec);
  const int gk = grid_side / spec.k;
  const int tchunks = frames_per_clip / spec.f;
  MotionFeature feat;
  feat.hist = HistKind::h1d;
  feat.data.assign(static_cast<std::size_t>(tchunks) * gk * gk * 8, 0.0f);
  for (int t = 0; t < q.frames; ++t) {
    for (int j = 0; j < q.points; ++j) {
      const std::size_t vol = volume_of(t, j, grid_side, gk, spec.f, spec.k);
      const std::size_t i = static_cast<std::size_t>(t) * q.points + j;
      feat.data[vol * 8 + q.angle_bin[i]] += static_cast<float>(polar.mag[i]);
    }
  }
  return feat;
}

namespace {

MotionFeature single_field_feature(const TrajectorySet& traj, FieldKind kind,
                                   const FeatureConfig& cfg) {
  VectorField field = velocity_field(traj);
  if (kind == FieldKind::acceleration) field = acceleration_field(field);
  const PolarField polar = polar_decompose(field);
  const QuantizedField q = quantize(polar);
  if (cfg.hist == HistKind::h2d) {
    return histogram_2d(q, traj.grid_side, traj.frames, cfg.spec);
  }
  if (cfg.raw_magnitude_1d) {
    return histogram_1d_raw(q, polar, traj.grid_side, traj.frames, cfg.spec);
  }
  return histogram_1d(q, traj.grid_side, traj.frames, cfg.spec);
}

}  // namespace

MotionFeature extract_feature(const TrajectorySet& traj, const FeatureConfig& cfg) {
  MotionFeature feat;
  feat.fields = cfg.fields;
  feat.hist = cfg.hist;
  if (cfg.fields == FeatureFields::velocity) {
    feat.data = single_field_feature(traj, FieldKind::velocity, cfg).data;
  } else if (cfg.fields == FeatureFields::acceleration) {
    feat.data = single_field_feature(traj, FieldKind::acceleration, cfg).data;
  } else {
    MotionFeature v = single_field_feature(traj, FieldKind::velocity, cfg);
    const MotionFeature a = single_field_feature(traj, FieldKind::acceleration, cfg);
    feat.data = std::move(v.data);
    feat.data.insert(feat.data.end(), a.data.begin(), a.data.end());
  }
  return feat;
}

std::size_t feature_length(int frames_per_clip, int grid_side,
                           const FeatureConfig& cfg) {
  if (cfg.spec.f < 1 || cfg.spec.k < 1 || frames_per_clip % cfg.spec.f != 0 ||
      grid_side % cfg.spec.k != 0) {
    throw BadVolumeSpec("volume spec does not divide the clip shape");
  }
  const std::size_t vols = static_cast<std::size_t>(frames_per_clip / cfg.spec.f) *
                           (grid_side / cfg.spec.k) * (grid_side / cfg.spec.k);
  const std::size_t bins = cfg.hist == HistKind::h2d ? 72 : 8;
  const std::size_t mult = cfg.fields == FeatureFields::combined ? 2 : 1;
  return vols * bins * mult;
}

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  char b[4];
  b[0] = static_cast<char>(v & 0xff);
  b[1] = static_cast<char>((v >> 8) & 0xff);
  b[2] = static_cast<char>((v >> 16) & 0xff);
  b[3] = static_cast<char>((v >> 24) & 0xff);
  buf.append(b, 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

constexpr char kFeatMagic[9] = "FVMDFEAT";
constexpr std::size_t kFeatHeader = 8 + 3 * 4;

}  // namespace

void export_features(const std::vector<MotionFeature>& feats,
                     const std::filesystem::path& path) {
  if (feats.empty()) throw FormatError("refusing to write zero feature rows");
  const std::size_t cols = feats.front().data.size();
  for (const auto& f : feats) {
    if (f.data.size() != cols) {
      throw DimensionMismatch("feature rows differ in length");
    }
  }
  std::string header;
  header.append(kFeatMagic, 8);
  put_u32(header, 1);
  put_u32(header, static_cast<std::uint32_t>(feats.size()));
  put_u32(header, static_cast<std::uint32_t>(cols));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WriteError("cannot open " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& f : feats) {
    out.write(reinterpret_cast<const char*>(f.data.data()),
              static_cast<std::streamsize>(f.data.size() * sizeof(float)));
  }
  if (!out) throw WriteError("cannot write " + path.string());
}

std::vector<MotionFeature> import_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::size_t file_size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  if (file_size < kFeatHeader) throw FormatError("file too small: " + path.string());
  unsigned char header[kFeatHeader];
  in.read(reinterpret_cast<char*>(header), kFeatHeader);
  if (std::memcmp(header, kFeatMagic, 8) != 0) {
    throw FormatError("bad magic in " + path.string());
  }
  if (get_u32(header + 8) != 1) throw FormatError("unsupported version in " + path.string());
  const std::uint32_t rows = get_u32(header + 12);
  const std::uint32_t cols = get_u32(header + 16);
  if (rows == 0 || cols == 0) throw FormatError("degenerate header in " + path.string());
  if (file_size != kFeatHeader + static_cast<std::size_t>(rows) * cols * sizeof(float)) {
    throw FormatError("payload size mismatch in " + path.string());
  }
  std::vector<MotionFeature> feats(rows);
  for (auto& f : feats) {
    f.data.resize(cols);
    in.read(reinterpret_cast<char*>(f.data.data()),
            static_cast<std::streamsize>(cols * sizeof(float)));
    if (!in) throw FormatError("truncated payload in " + path.string());
  }
  return feats;
}

}  // namespace fvmd
