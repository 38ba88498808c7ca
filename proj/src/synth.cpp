#include "fvmd/synth.hpp"

#include <cmath>
#include <cstdio>

#include "fvmd/errors.hpp"
#include "fvmd/rng.hpp"

namespace fvmd {

MotionLaw parse_motion_law(const std::string& name) {
  if (name == "const" || name == "constant") return MotionLaw::constant;
  if (name == "sine") return MotionLaw::sine;
  if (name == "walk") return MotionLaw::walk;
  throw BadConfig("unknown motion law: " + name);
}

std::string motion_law_name(MotionLaw law) {
  switch (law) {
    case MotionLaw::constant: return "const";
    case MotionLaw::sine: return "sine";
    default: return "walk";
  }
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Sum of cosine waves with integer frequencies, so the field is exactly
// periodic over the canvas and wraparound translation has no seam in the
// underlying signal.
std::vector<float> make_texture(int w, int h, const SynthParams& p, Rng& rng,
                                double contrast) {
  std::vector<double> acc(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<double> cx(w), sx(w), cy(h), sy(h);
  for (int wave = 0; wave < p.texture_waves; ++wave) {
    int fx = 0, fy = 0;
    for (;;) {
      fx = static_cast<int>(rng.below(2 * 20 + 1)) - 20;
      fy = static_cast<int>(rng.below(2 * 20 + 1)) - 20;
      const double r = std::hypot(static_cast<double>(fx), static_cast<double>(fy));
      if (r >= p.min_wave_radius && r <= p.max_wave_radius) break;
    }
    const double r = std::hypot(static_cast<double>(fx), static_cast<double>(fy));
    const double amp = rng.uniform(0.5, 1.0) / r;
    const double phase = rng.uniform(0.0, kTwoPi);
    // cos(ax + by + c) expanded so the evaluation is separable
    for (int x = 0; x < w; ++x) {
      const double a = kTwoPi * fx * x / w;
      cx[x] = std::cos(a);
      sx[x] = std::sin(a);
    }
    for (int y = 0; y < h; ++y) {
      const double b = kTwoPi * fy * y / h + phase;
      cy[y] = std::cos(b);
      sy[y] = std::sin(b);
    }
    for (int y = 0; y < h; ++y) {
      double* row = &acc[static_cast<std::size_t>(y) * w];
      const double cyv = amp * cy[y];
      const double syv = amp * sy[y];
      for (int x = 0; x < w; ++x) row[x] += cx[x] * cyv - sx[x] * syv;
    }
  }

  double mean = 0.0;
  for (double v : acc) mean += v;
  mean /= static_cast<double>(acc.size());
  double var = 0.0;
  for (double v : acc) var += (v - mean) * (v - mean);
  var /= static_cast<double>(acc.size());
  const double sd = std::sqrt(var);
  const double gain = sd > 0.0 ? p.texture_std * contrast / sd : 0.0;

  std::vector<float> tex(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    tex[i] = static_cast<float>(128.0 + (acc[i] - mean) * gain);
  }
  return tex;
}

// Toroidal bilinear sample of the texture shifted by (ox, oy).
Image render_frame(const std::vector<float>& tex, int w, int h, double ox,
                   double oy) {
  Image img(w, h, 1);
  const double syf = oy - std::floor(oy / h) * h;  // wrapped into [0, h)
  const double sxf = ox - std::floor(ox / w) * w;
  const int iy = static_cast<int>(syf);
  const int ix = static_cast<int>(sxf);
  const float fy = static_cast<float>(syf - iy);
  const float fx = static_cast<float>(sxf - ix);
  const float w00 = (1.0f - fx) * (1.0f - fy);
  const float w01 = fx * (1.0f - fy);
  const float w10 = (1.0f - fx) * fy;
  const float w11 = fx * fy;
  for (int y = 0; y < h; ++y) {
    const int y0 = (y + iy) % h;
    const int y1 = (y0 + 1) % h;
    const float* r0 = &tex[static_cast<std::size_t>(y0) * w];
    const float* r1 = &tex[static_cast<std::size_t>(y1) * w];
    std::uint8_t* out = &img.data[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      const int x0 = (x + ix) % w;
      const int x1 = (x0 + 1) % w;
      float v = w00 * r0[x0] + w01 * r0[x1] + w10 * r1[x0] + w11 * r1[x1];
      if (v < 0.0f) v = 0.0f;
      if (v > 255.0f) v = 255.0f;
      out[x] = static_cast<std::uint8_t>(std::lround(v));
    }
  }
  return img;
}

}  // namespace

FrameSequence synth_video(const std::string& id, const SynthParams& p) {
  if (p.frames < 1 || p.width < 8 || p.height < 8) {
    throw BadConfig("invalid synthetic video shape");
  }
  Rng rng(derive_seed(p.seed, id));
  const double contrast = rng.uniform(p.contrast_min, p.contrast_max);
  const std::vector<float> tex = make_texture(p.width, p.height, p, rng, contrast);

  // Per-frame offsets of the texture under the chosen motion law.
  std::vector<double> ox(p.frames, 0.0), oy(p.frames, 0.0);
  if (p.use_fixed_velocity) {
    // The renderer samples tex(x + ox), so content moving at +v needs -v
    // offsets.
    for (int t = 0; t < p.frames; ++t) {
      ox[t] = -p.fixed_vx * t;
      oy[t] = -p.fixed_vy * t;
    }
  } else if (p.law == MotionLaw::constant) {
    const double theta = rng.uniform(0.0, kTwoPi);
    const double speed = rng.uniform(p.min_speed, p.max_speed);
    for (int t = 0; t < p.frames; ++t) {
      ox[t] = speed * std::cos(theta) * t;
      oy[t] = speed * std::sin(theta) * t;
    }
  } else if (p.law == MotionLaw::sine) {
    const double theta = rng.uniform(0.0, kTwoPi);
    double amp = 0.0, omega = 0.0;
    do {
      amp = rng.uniform(p.min_amp, p.max_amp);
      omega = rng.uniform(p.min_omega, p.max_omega);
    } while (amp * omega > p.max_peak_speed);
    const double phase = rng.uniform(0.0, kTwoPi);
    for (int t = 0; t < p.frames; ++t) {
      const double s = amp * std::sin(omega * t + phase);
      ox[t] = s * std::cos(theta);
      oy[t] = s * std::sin(theta);
    }
  } else {
    for (int t = 1; t < p.frames; ++t) {
      ox[t] = ox[t - 1] + p.walk_sigma * rng.normal();
      oy[t] = oy[t - 1] + p.walk_sigma * rng.normal();
    }
  }

  FrameSequence seq;
  seq.id = id;
  seq.frames.reserve(p.frames);
  for (int t = 0; t < p.frames; ++t) {
    seq.frames.push_back(render_frame(tex, p.width, p.height, ox[t], oy[t]));
  }
  return seq;
}

void synth_dataset(const std::filesystem::path& set_dir, int count,
                   const SynthParams& params, const std::string& format) {
  if (count < 1) throw BadConfig("video count must be positive");
  if (format != "png" && format != "pgm" && format != "ppm") {
    throw BadConfig("unknown frame format: " + format);
  }
  std::filesystem::create_directories(set_dir);
  char vname[16];
  char fname[16];
  for (int v = 0; v < count; ++v) {
    std::snprintf(vname, sizeof(vname), "v%04d", v);
    const FrameSequence seq = synth_video(vname, params);
    const std::filesystem::path vdir = set_dir / vname;
    std::filesystem::create_directories(vdir);
    for (int t = 0; t < seq.length(); ++t) {
      std::snprintf(fname, sizeof(fname), "f%03d.%s", t, format.c_str());
      if (format == "ppm") {
        // PPM wants 3 channels; replicate the gray plane
        Image rgb(seq.frames[t].width, seq.frames[t].height, 3);
        for (std::size_t i = 0; i < seq.frames[t].data.size(); ++i) {
          rgb.data[3 * i] = rgb.data[3 * i + 1] = rgb.data[3 * i + 2] =
              seq.frames[t].data[i];
        }
        encode_image(rgb, vdir / fname);
      } else {
        encode_image(seq.frames[t], vdir / fname);
      }
    }
  }
}

}  // namespace fvmd
