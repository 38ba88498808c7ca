#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fvmd/errors.hpp"
#include "fvmd/motion_features.hpp"

namespace fs = std::filesystem;
using fvmd::FeatureConfig;
using fvmd::FeatureFields;
using fvmd::FieldKind;
using fvmd::HistKind;
using fvmd::MotionFeature;
using fvmd::PolarField;
using fvmd::QuantizedField;
using fvmd::TrajectorySet;
using fvmd::VectorField;
using fvmd::VolumeSpec;

namespace {

constexpr double kPi = 3.14159265358979323846;

TrajectorySet static_traj(int frames, int n, int grid_side) {
  TrajectorySet t(frames, n, grid_side);
  for (int f = 0; f < frames; ++f) {
    for (int j = 0; j < n; ++j) {
      t.set(f, j, static_cast<float>(j % grid_side),
            static_cast<float>(j / grid_side));
    }
  }
  return t;
}

// Independent reimplementation of the histogram layout used as an oracle:
// temporal chunk outer, then block row, then block column, then bin.
std::vector<float> brute_hist2d(const QuantizedField& q, int grid_side,
                                const VolumeSpec& spec) {
  const int tchunks = q.frames / spec.f;
  const int blocks = grid_side / spec.k;
  std::vector<float> out(static_cast<std::size_t>(tchunks) * blocks * blocks * 72,
                         0.0f);
  for (int t = 0; t < q.frames; ++t) {
    for (int j = 0; j < q.points; ++j) {
      const int tau = t / spec.f;
      const int by = (j / grid_side) / spec.k;
      const int bx = (j % grid_side) / spec.k;
      const std::size_t idx = q.mag_bin[static_cast<std::size_t>(t) * q.points + j];
      const std::size_t adx = q.angle_bin[static_cast<std::size_t>(t) * q.points + j];
      out[((static_cast<std::size_t>(tau) * blocks + by) * blocks + bx) * 72 +
          adx * 9 + idx] += 1.0f;
    }
  }
  return out;
}

std::vector<float> brute_hist1d(const QuantizedField& q, int grid_side,
                                const VolumeSpec& spec) {
  const int tchunks = q.frames / spec.f;
  const int blocks = grid_side / spec.k;
  std::vector<float> out(static_cast<std::size_t>(tchunks) * blocks * blocks * 8,
                         0.0f);
  for (int t = 0; t < q.frames; ++t) {
    for (int j = 0; j < q.points; ++j) {
      const int tau = t / spec.f;
      const int by = (j / grid_side) / spec.k;
      const int bx = (j % grid_side) / spec.k;
      const std::size_t adx = q.angle_bin[static_cast<std::size_t>(t) * q.points + j];
      out[((static_cast<std::size_t>(tau) * blocks + by) * blocks + bx) * 8 + adx] +=
          q.mag_bin[static_cast<std::size_t>(t) * q.points + j];
    }
  }
  return out;
}

}  // namespace

TEST_CASE("velocity matches the first-order difference by hand") {
  TrajectorySet t(3, 1, 1);
  t.set(0, 0, 0, 0);
  t.set(1, 0, 1, 0);
  t.set(2, 0, 3, 0);
  const VectorField v = fvmd::velocity_field(t);
  CHECK(v.kind == FieldKind::velocity);
  CHECK(v.x(0, 0) == 0.0);
  CHECK(v.y(0, 0) == 0.0);
  CHECK(v.x(1, 0) == 1.0);
  CHECK(v.x(2, 0) == 2.0);
}

TEST_CASE("constant trajectory gives a zero velocity field") {
  const VectorField v = fvmd::velocity_field(static_traj(5, 4, 2));
  for (double val : v.values) CHECK(val == 0.0);
}

TEST_CASE("cumulative sum of velocity reconstructs the trajectory") {
  TrajectorySet t(6, 3, 1);
  for (int f = 0; f < 6; ++f) {
    for (int j = 0; j < 3; ++j) {
      t.set(f, j, static_cast<float>(f * f + j), static_cast<float>(3 - f + j));
    }
  }
  const VectorField v = fvmd::velocity_field(t);
  for (int j = 0; j < 3; ++j) {
    double x = t.x(0, j), y = t.y(0, j);
    for (int f = 1; f < 6; ++f) {
      x += v.x(f, j);
      y += v.y(f, j);
      // Integer-valued positions keep the telescoping sum exact.
      CHECK(x == static_cast<double>(t.x(f, j)));
      CHECK(y == static_cast<double>(t.y(f, j)));
    }
  }
}

TEST_CASE("acceleration matches the hand example and padding artifact") {
  VectorField v(3, 1, FieldKind::velocity);
  v.set(0, 0, 0, 0);
  v.set(1, 0, 1, 0);
  v.set(2, 0, 2, 0);
  const VectorField a = fvmd::acceleration_field(v);
  CHECK(a.kind == FieldKind::acceleration);
  CHECK(a.x(0, 0) == 0.0);
  CHECK(a.x(1, 0) == 1.0);
  CHECK(a.x(2, 0) == 1.0);

  // Constant velocity after the zero pad: A picks up the padding spike.
  VectorField cv(5, 1, FieldKind::velocity);
  for (int f = 1; f < 5; ++f) cv.set(f, 0, 2.5, -1);
  const VectorField ca = fvmd::acceleration_field(cv);
  CHECK(ca.x(0, 0) == 0.0);
  CHECK(ca.x(1, 0) == 2.5);
  CHECK(ca.y(1, 0) == -1.0);
  for (int f = 2; f < 5; ++f) {
    CHECK(ca.x(f, 0) == 0.0);
    CHECK(ca.y(f, 0) == 0.0);
  }

  CHECK_THROWS_AS(
      fvmd::acceleration_field(fvmd::acceleration_field(v)), fvmd::KindError);
}

TEST_CASE("polar decomposition endpoints and conventions") {
  VectorField v(1, 4, FieldKind::velocity);
  v.set(0, 0, 3, 4);
  v.set(0, 1, 300, 0);
  v.set(0, 2, 0, 0);
  v.set(0, 3, 0, -1);
  const PolarField p = fvmd::polar_decompose(v);
  CHECK(p.mag[0] == doctest::Approx(5.0));
  CHECK(p.angle[0] == doctest::Approx(std::atan2(4.0, 3.0)));
  CHECK(p.mag[1] == 255.0);
  CHECK(p.angle[1] == 0.0);
  CHECK(p.mag[2] == 0.0);
  CHECK(p.angle[2] == 0.0);
  CHECK(p.angle[3] == doctest::Approx(1.5 * kPi));
}

TEST_CASE("quantization endpoints") {
  PolarField p;
  p.frames = 1;
  p.points = 6;
  p.mag = {0, 3, 255, 4.657, 1, 1};
  p.angle = {0, 0, 0, 0, kPi / 2, 359.0 * kPi / 180.0};
  const QuantizedField q = fvmd::quantize(p);
  CHECK(q.mag_bin[0] == 0);
  CHECK(q.mag_bin[1] == 2);
  CHECK(q.mag_bin[2] == 8);
  CHECK(q.mag_bin[3] == 3);  // log2(5.657) is just above 2.5
  CHECK(q.angle_bin[0] == 0);
  CHECK(q.angle_bin[4] == 2);
  CHECK(q.angle_bin[5] == 7);
}

TEST_CASE("all-zero motion concentrates counts in the zero joint bin") {
  const TrajectorySet t = static_traj(16, 400, 20);
  const QuantizedField q = fvmd::quantize(fvmd::polar_decompose(fvmd::velocity_field(t)));
  const MotionFeature h = fvmd::histogram_2d(q, 20, 16, {});
  REQUIRE(h.data.size() == 4608);
  for (std::size_t i = 0; i < h.data.size(); ++i) {
    if (i % 72 == 0) {
      CHECK(h.data[i] == 100.0f);
    } else {
      CHECK(h.data[i] == 0.0f);
    }
  }
}

TEST_CASE("every volume's 2d bin counts sum to f*k*k") {
  QuantizedField q;
  q.frames = 16;
  q.points = 400;
  q.mag_bin.resize(16 * 400);
  q.angle_bin.resize(16 * 400);
  for (std::size_t i = 0; i < q.mag_bin.size(); ++i) {
    q.mag_bin[i] = static_cast<std::uint8_t>((i * 5 + 1) % 9);
    q.angle_bin[i] = static_cast<std::uint8_t>((i * 3 + 2) % 8);
  }
  const MotionFeature h = fvmd::histogram_2d(q, 20, 16, {});
  REQUIRE(h.data.size() == 4608);
  for (std::size_t v = 0; v < h.data.size() / 72; ++v) {
    float sum = 0;
    for (int b = 0; b < 72; ++b) sum += h.data[v * 72 + b];
    CHECK(sum == 100.0f);
  }
  CHECK(h.data == brute_hist2d(q, 20, {}));
}

TEST_CASE("single mover's counts land in its volume at mag bin 2") {
  TrajectorySet t = static_traj(16, 400, 20);
  const int j = 7 * 20 + 11;  // row 7, column 11
  for (int f = 1; f < 16; ++f) {
    t.set(f, j, t.x(0, j) + 3.0f * f, t.y(0, j));
  }
  const QuantizedField q = fvmd::quantize(fvmd::polar_decompose(fvmd::velocity_field(t)));
  const MotionFeature h = fvmd::histogram_2d(q, 20, 16, {});
  CHECK(h.data == brute_hist2d(q, 20, {}));

  // The mover lives in block (1, 2); its first temporal volume keeps the
  // frame-0 zero row, later ones do not.
  const int blocks = 4;
  for (int tau = 0; tau < 4; ++tau) {
    const std::size_t base = ((static_cast<std::size_t>(tau) * blocks + 1) * blocks + 2) * 72;
    CHECK(h.data[base + 0] == (tau == 0 ? 97.0f : 96.0f));
    CHECK(h.data[base + 2] == (tau == 0 ? 3.0f : 4.0f));
  }
}

TEST_CASE("1d histogram sums quantized magnitudes per angle bin") {
  QuantizedField q;
  q.frames = 16;
  q.points = 400;
  q.mag_bin.assign(16 * 400, 0);
  q.angle_bin.assign(16 * 400, 0);
  const MotionFeature zero = fvmd::histogram_1d(q, 20, 16, {});
  REQUIRE(zero.data.size() == 512);
  for (float v : zero.data) CHECK(v == 0.0f);

  // One vector with mag bin 5, angle bin 3 at frame 9, point (12, 4).
  const int j = 12 * 20 + 4;
  q.mag_bin[9 * 400 + j] = 5;
  q.angle_bin[9 * 400 + j] = 3;
  const MotionFeature h = fvmd::histogram_1d(q, 20, 16, {});
  const std::size_t vol = (static_cast<std::size_t>(9 / 4) * 4 + (12 / 5)) * 4 + (4 / 5);
  for (std::size_t i = 0; i < h.data.size(); ++i) {
    CHECK(h.data[i] == (i == vol * 8 + 3 ? 5.0f : 0.0f));
  }
}

TEST_CASE("1d total equals the total quantized magnitude") {
  QuantizedField q;
  q.frames = 16;
  q.points = 400;
  q.mag_bin.resize(16 * 400);
  q.angle_bin.resize(16 * 400);
  double mag_total = 0;
  for (std::size_t i = 0; i < q.mag_bin.size(); ++i) {
    q.mag_bin[i] = static_cast<std::uint8_t>((i * 7 + 3) % 9);
    q.angle_bin[i] = static_cast<std::uint8_t>((i * 11 + 5) % 8);
    mag_total += q.mag_bin[i];
  }
  const MotionFeature h = fvmd::histogram_1d(q, 20, 16, {});
  double sum = 0;
  for (float v : h.data) sum += v;
  CHECK(sum == mag_total);
  CHECK(h.data == brute_hist1d(q, 20, {}));
}

TEST_CASE("feature lengths match the default shapes") {
  FeatureConfig cfg;
  cfg.fields = FeatureFields::velocity;
  cfg.hist = HistKind::h1d;
  CHECK(fvmd::feature_length(16, 20, cfg) == 512);
  cfg.hist = HistKind::h2d;
  CHECK(fvmd::feature_length(16, 20, cfg) == 4608);
  cfg.fields = FeatureFields::combined;
  cfg.hist = HistKind::h1d;
  CHECK(fvmd::feature_length(16, 20, cfg) == 1024);

  const TrajectorySet t = static_traj(16, 400, 20);
  cfg.fields = FeatureFields::velocity;
  CHECK(fvmd::extract_feature(t, cfg).data.size() == 512);
  cfg.hist = HistKind::h2d;
  CHECK(fvmd::extract_feature(t, cfg).data.size() == 4608);
  cfg.fields = FeatureFields::combined;
  cfg.hist = HistKind::h1d;
  const MotionFeature f = fvmd::extract_feature(t, cfg);
  CHECK(f.data.size() == 1024);
  for (float v : f.data) CHECK(v == 0.0f);
}

TEST_CASE("combined concatenates velocity before acceleration") {
  TrajectorySet t = static_traj(16, 400, 20);
  const int j = 3 * 20 + 3;
  // Constant velocity: acceleration only spikes at frame 1.
  for (int f = 1; f < 16; ++f) t.set(f, j, t.x(0, j) + 3.0f * f, t.y(0, j));

  FeatureConfig cfg;
  cfg.hist = HistKind::h1d;
  cfg.fields = FeatureFields::velocity;
  const auto fv = fvmd::extract_feature(t, cfg);
  cfg.fields = FeatureFields::acceleration;
  const auto fa = fvmd::extract_feature(t, cfg);
  cfg.fields = FeatureFields::combined;
  const auto fc = fvmd::extract_feature(t, cfg);
  REQUIRE(fc.data.size() == 1024);
  for (int i = 0; i < 512; ++i) {
    CHECK(fc.data[i] == fv.data[i]);
    CHECK(fc.data[512 + i] == fa.data[i]);
  }
  // They differ, so the order check is not vacuous.
  CHECK(fv.data != fa.data);
}

TEST_CASE("features are invariant to a constant position offset") {
  // Dyadic coordinates stay exact under the float offset, so the velocity
  // differences are bit-identical and the invariance holds without slack.
  TrajectorySet t(16, 400, 20);
  for (int f = 0; f < 16; ++f) {
    for (int j = 0; j < 400; ++j) {
      t.set(f, j, static_cast<float>(j % 20 + 0.25 * f),
            static_cast<float>(j / 20 + 0.0625 * f * f));
    }
  }
  TrajectorySet shifted = t;
  for (std::size_t i = 0; i < shifted.coords.size(); ++i) shifted.coords[i] += 40.0f;
  FeatureConfig cfg;
  CHECK(fvmd::extract_feature(t, cfg).data == fvmd::extract_feature(shifted, cfg).data);
}

TEST_CASE("permuting whole blocks permutes volume histograms") {
  QuantizedField q;
  q.frames = 16;
  q.points = 400;
  q.mag_bin.resize(16 * 400);
  q.angle_bin.resize(16 * 400);
  for (std::size_t i = 0; i < q.mag_bin.size(); ++i) {
    q.mag_bin[i] = static_cast<std::uint8_t>((i * 13 + 1) % 9);
    q.angle_bin[i] = static_cast<std::uint8_t>((i * 17 + 4) % 8);
  }
  // Swap block (0,0) with block (1,2): point (r,c) <-> (r+5, c+10).
  QuantizedField swapped = q;
  for (int t = 0; t < 16; ++t) {
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 5; ++c) {
        const std::size_t a = static_cast<std::size_t>(t) * 400 + r * 20 + c;
        const std::size_t b = static_cast<std::size_t>(t) * 400 + (r + 5) * 20 + (c + 10);
        std::swap(swapped.mag_bin[a], swapped.mag_bin[b]);
        std::swap(swapped.angle_bin[a], swapped.angle_bin[b]);
      }
    }
  }
  const MotionFeature orig = fvmd::histogram_2d(q, 20, 16, {});
  const MotionFeature perm = fvmd::histogram_2d(swapped, 20, 16, {});
  const int blocks = 4;
  for (int tau = 0; tau < 4; ++tau) {
    for (int by = 0; by < blocks; ++by) {
      for (int bx = 0; bx < blocks; ++bx) {
        int sy = by, sx = bx;
        if (by == 0 && bx == 0) {
          sy = 1;
          sx = 2;
        } else if (by == 1 && bx == 2) {
          sy = 0;
          sx = 0;
        }
        for (int bin = 0; bin < 72; ++bin) {
          const auto at = [&](int yy, int xx) {
            return ((static_cast<std::size_t>(tau) * blocks + yy) * blocks + xx) * 72 + bin;
          };
          CHECK(perm.data[at(by, bx)] == orig.data[at(sy, sx)]);
        }
      }
    }
  }
}

TEST_CASE("volume spec must divide the clip shape") {
  const TrajectorySet t = static_traj(16, 400, 20);
  FeatureConfig cfg;
  cfg.spec = {3, 5};
  CHECK_THROWS_AS(fvmd::extract_feature(t, cfg), fvmd::BadVolumeSpec);
  cfg.spec = {4, 3};
  CHECK_THROWS_AS(fvmd::extract_feature(t, cfg), fvmd::BadVolumeSpec);
  cfg.spec = {4, 5};
  CHECK_NOTHROW(fvmd::extract_feature(t, cfg));
}

TEST_CASE("feature file round-trip") {
  const fs::path dir = fs::temp_directory_path() / "fvmd_feat";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<MotionFeature> feats(3);
  for (int i = 0; i < 3; ++i) {
    feats[i].fields = FeatureFields::combined;
    feats[i].hist = HistKind::h1d;
    feats[i].data.resize(1024);
    for (std::size_t k = 0; k < 1024; ++k) {
      feats[i].data[k] = static_cast<float>(i * 1000 + k) * 0.25f;
    }
  }
  const fs::path path = dir / "f.fvmdfeat";
  fvmd::export_features(feats, path);
  const auto back = fvmd::import_features(path);
  REQUIRE(back.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(back[i].data == feats[i].data);
  CHECK_THROWS_AS(fvmd::import_features(dir / "missing.fvmdfeat"), fvmd::FormatError);
}
