#include "fvmd/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "fvmd/errors.hpp"

namespace fvmd {

namespace {

// One pyramid level, padded on all sides so window reads never branch.
// Reads use border-replicate semantics via the padding.
struct PyrLevel {
  int w = 0, h = 0, pad = 0, stride = 0;
  std::vector<float> img, ix, iy;

  float* at(std::vector<float>& a, int x, int y) {
    return &a[(static_cast<std::size_t>(y) + pad) * stride + x + pad];
  }
  const float* row(const std::vector<float>& a, int y) const {
    return &a[(static_cast<std::size_t>(y) + pad) * stride + pad];
  }
};

using Pyramid = std::vector<PyrLevel>;

void fill_border(PyrLevel& lv, std::vector<float>& a) {
  const int p = lv.pad;
  // replicate rows sideways, then whole edge rows up and down
  for (int y = 0; y < lv.h; ++y) {
    float* r = lv.at(a, 0, y);
    const float left = r[0];
    const float right = r[lv.w - 1];
    for (int x = 1; x <= p; ++x) {
      r[-x] = left;
      r[lv.w - 1 + x] = right;
    }
  }
  const float* top = lv.at(a, -p, 0);
  const float* bot = lv.at(a, -p, lv.h - 1);
  for (int y = 1; y <= p; ++y) {
    std::memcpy(lv.at(a, -p, -y), top, sizeof(float) * lv.stride);
    std::memcpy(lv.at(a, -p, lv.h - 1 + y), bot, sizeof(float) * lv.stride);
  }
}

void compute_gradients(PyrLevel& lv) {
  lv.ix.assign(lv.img.size(), 0.0f);
  lv.iy.assign(lv.img.size(), 0.0f);
  for (int y = 0; y < lv.h; ++y) {
    const float* rm = lv.row(lv.img, y - 1);
    const float* r0 = lv.row(lv.img, y);
    const float* rp = lv.row(lv.img, y + 1);
    float* gx = lv.at(lv.ix, 0, y);
    float* gy = lv.at(lv.iy, 0, y);
    for (int x = 0; x < lv.w; ++x) {
      gx[x] = 0.5f * (r0[x + 1] - r0[x - 1]);
      gy[x] = 0.5f * (rp[x] - rm[x]);
    }
  }
  fill_border(lv, lv.ix);
  fill_border(lv, lv.iy);
}

PyrLevel make_level(int w, int h, int pad) {
  PyrLevel lv;
  lv.w = w;
  lv.h = h;
  lv.pad = pad;
  lv.stride = w + 2 * pad;
  lv.img.assign(static_cast<std::size_t>(lv.stride) * (h + 2 * pad), 0.0f);
  return lv;
}

// 5-tap [1 4 6 4 1]/16 blur fused with 2x decimation.
PyrLevel downsample(const PyrLevel& src, int pad) {
  PyrLevel dst = make_level(std::max(1, src.w / 2), std::max(1, src.h / 2), pad);
  std::vector<float> tmp(static_cast<std::size_t>(src.w));
  for (int y = 0; y < dst.h; ++y) {
    const int sy = 2 * y;
    const float* r0 = src.row(src.img, sy - 2);
    const float* r1 = src.row(src.img, sy - 1);
    const float* r2 = src.row(src.img, sy);
    const float* r3 = src.row(src.img, sy + 1);
    const float* r4 = src.row(src.img, sy + 2);
    for (int x = 0; x < src.w; ++x) {
      tmp[x] = (r0[x] + r4[x] + 4.0f * (r1[x] + r3[x]) + 6.0f * r2[x]) * (1.0f / 16.0f);
    }
    float* out = dst.at(dst.img, 0, y);
    for (int x = 0; x < dst.w; ++x) {
      const int sx = 2 * x;
      const float a = tmp[std::max(0, sx - 2)];
      const float b = tmp[std::max(0, sx - 1)];
      const float c = tmp[sx];
      const float d = tmp[std::min(src.w - 1, sx + 1)];
      const float e = tmp[std::min(src.w - 1, sx + 2)];
      out[x] = (a + e + 4.0f * (b + d) + 6.0f * c) * (1.0f / 16.0f);
    }
  }
  fill_border(dst, dst.img);
  compute_gradients(dst);
  return dst;
}

Pyramid build_pyramid(const Image& gray, int levels, int pad) {
  Pyramid pyr;
  pyr.reserve(levels);
  PyrLevel base = make_level(gray.width, gray.height, pad);
  for (int y = 0; y < gray.height; ++y) {
    float* dst = base.at(base.img, 0, y);
    const std::uint8_t* src = &gray.data[static_cast<std::size_t>(y) * gray.width];
    for (int x = 0; x < gray.width; ++x) dst[x] = static_cast<float>(src[x]);
  }
  fill_border(base, base.img);
  compute_gradients(base);
  pyr.push_back(std::move(base));
  for (int l = 1; l < levels; ++l) {
    pyr.push_back(downsample(pyr.back(), pad));
  }
  return pyr;
}

// Scratch buffers reused across points of a clip.
struct LkScratch {
  std::vector<float> aval, agx, agy;
};

// Bilinear window gather: values of `a` at (cx + dx, cy + dy) for integer
// offsets in [-r, r]. The fractional part is shared by every tap, so the
// four corner weights are computed once.
void gather_window(const PyrLevel& lv, const std::vector<float>& a, float cx,
                   float cy, int r, float* out) {
  const int ix = static_cast<int>(std::floor(cx));
  const int iy = static_cast<int>(std::floor(cy));
  const float fx = cx - ix;
  const float fy = cy - iy;
  const float w00 = (1.0f - fx) * (1.0f - fy);
  const float w01 = fx * (1.0f - fy);
  const float w10 = (1.0f - fx) * fy;
  const float w11 = fx * fy;
  const int win = 2 * r + 1;
  for (int dy = -r; dy <= r; ++dy) {
    const float* r0 = lv.row(a, iy + dy) + ix;
    const float* r1 = lv.row(a, iy + dy + 1) + ix;
    float* o = out + static_cast<std::size_t>(dy + r) * win;
    for (int dx = -r; dx <= r; ++dx) {
      o[dx + r] = w00 * r0[dx] + w01 * r0[dx + 1] + w10 * r1[dx] + w11 * r1[dx + 1];
    }
  }
}

float clampf(float v, float lo, float hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

// Iterative LK displacement for one point between two pyramids. Returns
// false when every level's window was degenerate.
bool lk_displacement(const Pyramid& prev, const Pyramid& next, float px,
                     float py, const LkParams& p, LkScratch& s, float* dx,
                     float* dy) {
  const int r = p.window_radius;
  const int win = 2 * r + 1;
  const int taps = win * win;
  s.aval.resize(taps);
  s.agx.resize(taps);
  s.agy.resize(taps);
  const float eps2 =
      static_cast<float>(p.convergence_epsilon * p.convergence_epsilon);
  const float min_eig_total = static_cast<float>(p.min_eigenvalue) * taps;

  float gx = 0.0f, gy = 0.0f;  // displacement estimate at the current level
  bool updated = false;
  for (int level = static_cast<int>(prev.size()) - 1; level >= 0; --level) {
    const PyrLevel& A = prev[level];
    const PyrLevel& B = next[level];
    const float scale = 1.0f / static_cast<float>(1 << level);
    const float cx = clampf(px * scale, 0.0f, static_cast<float>(A.w - 1));
    const float cy = clampf(py * scale, 0.0f, static_cast<float>(A.h - 1));

    gather_window(A, A.img, cx, cy, r, s.aval.data());
    gather_window(A, A.ix, cx, cy, r, s.agx.data());
    gather_window(A, A.iy, cx, cy, r, s.agy.data());

    float gxx = 0.0f, gxy = 0.0f, gyy = 0.0f;
    for (int i = 0; i < taps; ++i) {
      gxx += s.agx[i] * s.agx[i];
      gxy += s.agx[i] * s.agy[i];
      gyy += s.agy[i] * s.agy[i];
    }
    const float tr = gxx + gyy;
    const float det_disc =
        std::sqrt((gxx - gyy) * (gxx - gyy) + 4.0f * gxy * gxy);
    const float min_eig = 0.5f * (tr - det_disc);

    if (min_eig >= min_eig_total) {
      updated = true;
      const float det = gxx * gyy - gxy * gxy;
      const float inv_det = 1.0f / det;
      for (int iter = 0; iter < p.max_iterations; ++iter) {
        const float qx = clampf(cx + gx, 0.0f, static_cast<float>(B.w - 1));
        const float qy = clampf(cy + gy, 0.0f, static_cast<float>(B.h - 1));
        const int ix = static_cast<int>(std::floor(qx));
        const int iy = static_cast<int>(std::floor(qy));
        const float fx = qx - ix;
        const float fy = qy - iy;
        const float w00 = (1.0f - fx) * (1.0f - fy);
        const float w01 = fx * (1.0f - fy);
        const float w10 = (1.0f - fx) * fy;
        const float w11 = fx * fy;
        float bx = 0.0f, by = 0.0f;
        for (int dy2 = -r; dy2 <= r; ++dy2) {
          const float* r0 = B.row(B.img, iy + dy2) + ix;
          const float* r1 = B.row(B.img, iy + dy2 + 1) + ix;
          const float* av = s.aval.data() + static_cast<std::size_t>(dy2 + r) * win;
          const float* ax = s.agx.data() + static_cast<std::size_t>(dy2 + r) * win;
          const float* ay = s.agy.data() + static_cast<std::size_t>(dy2 + r) * win;
          for (int dx2 = -r; dx2 <= r; ++dx2) {
            const float bv = w00 * r0[dx2] + w01 * r0[dx2 + 1] +
                             w10 * r1[dx2] + w11 * r1[dx2 + 1];
            const float di = av[dx2 + r] - bv;
            bx += di * ax[dx2 + r];
            by += di * ay[dx2 + r];
          }
        }
        const float ex = (gyy * bx - gxy * by) * inv_det;
        const float ey = (gxx * by - gxy * bx) * inv_det;
        gx += ex;
        gy += ey;
        if (ex * ex + ey * ey < eps2) break;
      }
    }
    if (level > 0) {
      gx *= 2.0f;
      gy *= 2.0f;
    }
  }
  *dx = gx;
  *dy = gy;
  return updated;
}

void track_clip(const std::vector<const Pyramid*>& pyrs, const QueryGrid& grid,
                const LkParams& params, TrajectorySet& ts) {
  const int F = ts.frames;
  const int N = ts.points;
  for (int j = 0; j < N; ++j) ts.set(0, j, grid.x(j), grid.y(j));
  std::vector<float> dpx(N, 0.0f), dpy(N, 0.0f);
  LkScratch scratch;
  for (int t = 1; t < F; ++t) {
    const Pyramid& prev = *pyrs[t - 1];
    const Pyramid& next = *pyrs[t];
    for (int j = 0; j < N; ++j) {
      float dx = 0.0f, dy = 0.0f;
      if (!lk_displacement(prev, next, ts.x(t - 1, j), ts.y(t - 1, j), params,
                           scratch, &dx, &dy)) {
        dx = dpx[j];
        dy = dpy[j];
      }
      ts.set(t, j, ts.x(t - 1, j) + dx, ts.y(t - 1, j) + dy);
      dpx[j] = dx;
      dpy[j] = dy;
    }
  }
}

void validate_lk(const LkParams& p) {
  if (p.pyramid_levels < 1 || p.window_radius < 2 || p.max_iterations < 1 ||
      p.convergence_epsilon <= 0.0 || p.min_eigenvalue <= 0.0) {
    throw BadConfig("invalid tracker parameters");
  }
}

}  // namespace

QueryGrid init_grid(int n, int width, int height) {
  if (n < 1 || width <= 0 || height <= 0) throw BadGrid("invalid grid request");
  const int g = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (g * g != n) {
    throw BadGrid("point count " + std::to_string(n) + " is not a perfect square");
  }
  QueryGrid grid;
  grid.n = n;
  grid.grid_side = g;
  grid.xy.resize(static_cast<std::size_t>(n) * 2);
  for (int row = 0; row < g; ++row) {
    const float y = static_cast<float>((row + 0.5) * height / g);
    for (int col = 0; col < g; ++col) {
      const float x = static_cast<float>((col + 0.5) * width / g);
      grid.xy[2 * (static_cast<std::size_t>(row) * g + col)] = x;
      grid.xy[2 * (static_cast<std::size_t>(row) * g + col) + 1] = y;
    }
  }
  return grid;
}

TrajectorySet track_builtin(const Clip& clip, const QueryGrid& grid,
                            const LkParams& params) {
  validate_lk(params);
  const int F = static_cast<int>(clip.frames.size());
  if (F < 2) throw TooShort("clip must have at least 2 frames");
  std::vector<Pyramid> pyramids;
  pyramids.reserve(F);
  for (const auto& frame : clip.frames) {
    const Image gray = to_gray(frame);
    pyramids.push_back(
        build_pyramid(gray, params.pyramid_levels, params.window_radius + 2));
  }
  TrajectorySet ts(F, grid.n, grid.grid_side);
  ts.source = TrajectorySource::builtin_lk;
  ts.source_id = clip.source_id;
  ts.start_frame = clip.start_frame;
  std::vector<const Pyramid*> view(F);
  for (int t = 0; t < F; ++t) view[t] = &pyramids[t];
  track_clip(view, grid, params, ts);
  return ts;
}

std::vector<TrajectorySet> track_video(const FrameSequence& gray,
                                       const std::vector<int>& starts,
                                       int frames_per_clip,
                                       const QueryGrid& grid,
                                       const LkParams& params) {
  validate_lk(params);
  const int F = frames_per_clip;
  if (F < 2) throw TooShort("clip must have at least 2 frames");
  std::vector<Pyramid> pyramids;
  pyramids.reserve(gray.frames.size());
  for (const auto& frame : gray.frames) {
    pyramids.push_back(
        build_pyramid(frame, params.pyramid_levels, params.window_radius + 2));
  }
  std::vector<TrajectorySet> out;
  out.reserve(starts.size());
  for (int s : starts) {
    if (s < 0 || s + F > gray.length()) {
      throw TooShort("clip window [" + std::to_string(s) + ", " +
                     std::to_string(s + F) + ") exceeds sequence length");
    }
    TrajectorySet ts(F, grid.n, grid.grid_side);
    ts.source = TrajectorySource::builtin_lk;
    ts.source_id = gray.id;
    ts.start_frame = s;
    std::vector<const Pyramid*> view(F);
    for (int t = 0; t < F; ++t) view[t] = &pyramids[s + t];
    track_clip(view, grid, params, ts);
    out.push_back(std::move(ts));
  }
  return out;
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

constexpr char kTrajMagic[9] = "FVMDTRAJ";
constexpr std::size_t kTrajHeader = 8 + 4 * 4;

}  // namespace

void export_trajectories(const std::vector<TrajectorySet>& sets,
                         const std::filesystem::path& path) {
  if (sets.empty()) throw FormatError("refusing to write zero clips");
  const int F = sets.front().frames;
  const int N = sets.front().points;
  for (const auto& s : sets) {
    if (s.frames != F || s.points != N) {
      throw FormatError("all clips must share frame and point counts");
    }
  }
  std::string header;
  header.append(kTrajMagic, 8);
  put_u32(header, 1);
  put_u32(header, static_cast<std::uint32_t>(sets.size()));
  put_u32(header, static_cast<std::uint32_t>(F));
  put_u32(header, static_cast<std::uint32_t>(N));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw WriteError("cannot open " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& s : sets) {
    out.write(reinterpret_cast<const char*>(s.coords.data()),
              static_cast<std::streamsize>(s.coords.size() * sizeof(float)));
  }
  if (!out) throw WriteError("cannot write " + path.string());
  out.close();

  nlohmann::json index;
  index["version"] = 1;
  auto& clips = index["clips"];
  clips = nlohmann::json::array();
  for (const auto& s : sets) {
    clips.push_back({{"video", s.source_id}, {"start_frame", s.start_frame}});
  }
  std::ofstream side(path.string() + ".json");
  if (!side) throw WriteError("cannot open " + path.string() + ".json");
  side << index.dump(2) << '\n';
  if (!side) throw WriteError("cannot write " + path.string() + ".json");
}

std::vector<TrajectorySet> import_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::size_t file_size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  if (file_size < kTrajHeader) throw FormatError("file too small: " + path.string());
  unsigned char header[kTrajHeader];
  in.read(reinterpret_cast<char*>(header), kTrajHeader);
  if (std::memcmp(header, kTrajMagic, 8) != 0) {
    throw FormatError("bad magic in " + path.string());
  }
  const std::uint32_t version = get_u32(header + 8);
  if (version != 1) {
    throw FormatError("unsupported version " + std::to_string(version) + " in " +
                      path.string());
  }
  const std::uint32_t clip_count = get_u32(header + 12);
  const std::uint32_t F = get_u32(header + 16);
  const std::uint32_t N = get_u32(header + 20);
  if (clip_count == 0 || F < 2 || N == 0) {
    throw FormatError("degenerate header in " + path.string());
  }
  const int g = static_cast<int>(std::lround(std::sqrt(static_cast<double>(N))));
  if (static_cast<std::uint32_t>(g) * g != N) {
    throw FormatError("point count " + std::to_string(N) +
                      " is not a perfect square in " + path.string());
  }
  const std::size_t per_clip = static_cast<std::size_t>(F) * N * 2;
  const std::size_t expect = kTrajHeader + clip_count * per_clip * sizeof(float);
  if (file_size != expect) {
    throw CorruptTrajectories("payload size mismatch in " + path.string() +
                              ": expected " + std::to_string(expect) +
                              " bytes, found " + std::to_string(file_size));
  }

  std::vector<TrajectorySet> sets;
  sets.reserve(clip_count);
  for (std::uint32_t c = 0; c < clip_count; ++c) {
    TrajectorySet ts(static_cast<int>(F), static_cast<int>(N), g);
    ts.source = TrajectorySource::imported;
    ts.source_id = "clip_" + std::to_string(c);
    in.read(reinterpret_cast<char*>(ts.coords.data()),
            static_cast<std::streamsize>(per_clip * sizeof(float)));
    if (!in) throw CorruptTrajectories("truncated payload in " + path.string());
    for (float v : ts.coords) {
      if (!std::isfinite(v)) {
        throw CorruptTrajectories("non-finite coordinate in " + path.string());
      }
    }
    sets.push_back(std::move(ts));
  }

  // Optional sidecar index restores video ids and clip offsets.
  const std::filesystem::path side = path.string() + ".json";
  if (std::filesystem::exists(side)) {
    try {
      std::ifstream sin(side);
      nlohmann::json index = nlohmann::json::parse(sin);
      const auto& clips = index.at("clips");
      if (clips.size() == sets.size()) {
        for (std::size_t i = 0; i < sets.size(); ++i) {
          sets[i].source_id = clips[i].value("video", sets[i].source_id);
          sets[i].start_frame = clips[i].value("start_frame", 0);
        }
      }
    } catch (const nlohmann::json::exception&) {
      // unusable sidecar: keep synthesized ids
    }
  }
  return sets;
}

}  // namespace fvmd
