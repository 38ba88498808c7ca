#include "fvmd/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "fvmd/errors.hpp"
#include "fvmd/rng.hpp"

namespace fvmd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int square_side(int n) {
  const int g = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return g * g == n ? g : 0;
}

}  // namespace

void validate_config(const RunConfig& cfg) {
  validate_clip_spec({cfg.frames_per_clip, cfg.stride});
  const int g = square_side(cfg.grid_n);
  if (cfg.grid_n < 1 || g == 0) {
    throw BadGrid("grid point count must be a perfect square");
  }
  if (cfg.volume.f < 1 || cfg.frames_per_clip % cfg.volume.f != 0) {
    throw BadVolumeSpec("temporal chunk must divide frames per clip");
  }
  if (cfg.volume.k < 1 || g % cfg.volume.k != 0) {
    throw BadVolumeSpec("block side must divide the grid side");
  }
  if (cfg.eps < 0.0) throw BadConfig("eps must be non-negative");
  if (cfg.tracker != "builtin" && cfg.tracker != "import") {
    throw BadConfig("tracker must be 'builtin' or 'import'");
  }
  if (cfg.workers < 0) throw BadConfig("workers must be non-negative");
  if (cfg.lk.pyramid_levels < 1 || cfg.lk.window_radius < 2 ||
      cfg.lk.max_iterations < 1 || cfg.lk.convergence_epsilon <= 0.0 ||
      cfg.lk.min_eigenvalue <= 0.0) {
    throw BadConfig("invalid tracker parameters");
  }
}

FeatureConfig feature_config(const RunConfig& cfg) {
  FeatureConfig fc;
  fc.fields = cfg.fields;
  fc.hist = cfg.hist;
  fc.spec = cfg.volume;
  fc.raw_magnitude_1d = cfg.raw_magnitude_1d;
  return fc;
}

ClipSpec clip_spec(const RunConfig& cfg) {
  return {cfg.frames_per_clip, cfg.stride};
}

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::size_t n_workers = workers > 0
                              ? static_cast<std::size_t>(workers)
                              : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min(n_workers, count);
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<MotionFeature> features_from_gray(const FrameSequence& gray,
                                              const RunConfig& cfg) {
  if (gray.width() != kCanvas || gray.height() != kCanvas) {
    throw InconsistentFrames("sequence " + gray.id + " is not preprocessed to " +
                             std::to_string(kCanvas) + "x" + std::to_string(kCanvas));
  }
  const auto starts = segment_starts(gray.length(), clip_spec(cfg));
  const QueryGrid grid = init_grid(cfg.grid_n, kCanvas, kCanvas);
  const auto sets =
      track_video(gray, starts, cfg.frames_per_clip, grid, cfg.lk);
  const FeatureConfig fc = feature_config(cfg);
  std::vector<MotionFeature> feats;
  feats.reserve(sets.size());
  for (const auto& ts : sets) feats.push_back(extract_feature(ts, fc));
  return feats;
}

std::vector<MotionFeature> features_for_videos(
    const std::vector<FrameSequence>& gray_videos, const RunConfig& cfg) {
  std::vector<std::vector<MotionFeature>> per_video(gray_videos.size());
  parallel_for(gray_videos.size(), cfg.workers, [&](std::size_t i) {
    per_video[i] = features_from_gray(gray_videos[i], cfg);
  });
  std::vector<MotionFeature> flat;
  for (auto& v : per_video) {
    for (auto& f : v) flat.push_back(std::move(f));
  }
  return flat;
}

std::vector<MotionFeature> features_for_synth(int count,
                                              const SynthParams& params,
                                              const RunConfig& cfg) {
  std::vector<std::vector<MotionFeature>> per_video(
      static_cast<std::size_t>(count));
  parallel_for(static_cast<std::size_t>(count), cfg.workers, [&](std::size_t i) {
    char id[16];
    std::snprintf(id, sizeof(id), "v%04zu", i);
    FrameSequence seq = synth_video(id, params);
    if (seq.width() != kCanvas || seq.height() != kCanvas) {
      seq = preprocess(seq);
    }
    per_video[i] = features_from_gray(seq, cfg);
  });
  std::vector<MotionFeature> flat;
  for (auto& v : per_video) {
    for (auto& f : v) flat.push_back(std::move(f));
  }
  return flat;
}

std::vector<MotionFeature> features_from_trajectories(
    const std::vector<TrajectorySet>& sets, const RunConfig& cfg) {
  if (sets.empty()) throw TooFewSamples("no trajectory clips");
  const FeatureConfig fc = feature_config(cfg);
  for (const auto& ts : sets) {
    if (ts.frames % cfg.volume.f != 0 || ts.grid_side % cfg.volume.k != 0) {
      throw BadVolumeSpec("volume spec does not divide the imported clip shape");
    }
  }
  std::vector<MotionFeature> feats(sets.size());
  parallel_for(sets.size(), cfg.workers, [&](std::size_t i) {
    feats[i] = extract_feature(sets[i], fc);
  });
  return feats;
}

bool is_trajectory_path(const std::filesystem::path& path) {
  return path.extension() == ".fvmdtraj" ||
         (std::filesystem::exists(path) &&
          !std::filesystem::is_directory(path));
}

namespace {

// Load -> preprocess -> gray for every video directory, skipping videos that
// fail to decode; throws only when every video fails.
std::vector<FrameSequence> load_video_set(const std::filesystem::path& dir,
                                          const RunConfig& cfg, double* t_load) {
  const auto vdirs = list_video_dirs(dir);
  if (vdirs.empty()) throw NoFrames("no video directories in " + dir.string());
  std::vector<FrameSequence> out(vdirs.size());
  std::vector<char> ok(vdirs.size(), 0);
  std::atomic<long> load_ns{0};
  std::string first_failure;
  std::mutex fail_mutex;
  parallel_for(vdirs.size(), cfg.workers, [&](std::size_t i) {
    const auto t0 = Clock::now();
    try {
      out[i] = gray_sequence(preprocess(load_frames(vdirs[i])));
      ok[i] = 1;
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(fail_mutex);
      if (first_failure.empty()) first_failure = e.what();
      std::fprintf(stderr, "warning: skipping %s: %s\n",
                   vdirs[i].string().c_str(), e.what());
    }
    load_ns.fetch_add(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0)
            .count());
  });
  std::vector<FrameSequence> kept;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (ok[i]) kept.push_back(std::move(out[i]));
  }
  if (kept.empty()) {
    throw NoFrames("every video in " + dir.string() + " failed to load: " +
                   first_failure);
  }
  if (t_load) *t_load += static_cast<double>(load_ns.load()) * 1e-9;
  return kept;
}

}  // namespace

std::vector<MotionFeature> features_for_source(const std::filesystem::path& src,
                                               const RunConfig& cfg,
                                               FvmdReport* report) {
  if (is_trajectory_path(src)) {
    const auto t0 = Clock::now();
    const auto sets = import_trajectories(src);
    if (report) report->t_load += seconds_since(t0);
    const auto t1 = Clock::now();
    auto feats = features_from_trajectories(sets, cfg);
    if (report) report->t_features += seconds_since(t1);
    return feats;
  }
  if (cfg.tracker == "import") {
    throw BadConfig("tracker 'import' expects FVMDTRAJ sources, got directory " +
                    src.string());
  }
  const auto videos = load_video_set(src, cfg, report ? &report->t_load : nullptr);
  // track and extract per video so frames can be released early
  std::vector<std::vector<MotionFeature>> per_video(videos.size());
  std::atomic<long> track_ns{0}, feat_ns{0};
  const QueryGrid grid = init_grid(cfg.grid_n, kCanvas, kCanvas);
  const FeatureConfig fc = feature_config(cfg);
  parallel_for(videos.size(), cfg.workers, [&](std::size_t i) {
    const auto& gray = videos[i];
    const auto starts = segment_starts(gray.length(), clip_spec(cfg));
    const auto t0 = Clock::now();
    const auto sets =
        track_video(gray, starts, cfg.frames_per_clip, grid, cfg.lk);
    track_ns.fetch_add(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0)
            .count());
    const auto t1 = Clock::now();
    auto& row = per_video[i];
    row.reserve(sets.size());
    for (const auto& ts : sets) row.push_back(extract_feature(ts, fc));
    feat_ns.fetch_add(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t1)
            .count());
  });
  if (report) {
    report->t_track += static_cast<double>(track_ns.load()) * 1e-9;
    report->t_features += static_cast<double>(feat_ns.load()) * 1e-9;
  }
  std::vector<MotionFeature> flat;
  for (auto& v : per_video) {
    for (auto& f : v) flat.push_back(std::move(f));
  }
  return flat;
}

FvmdReport compute_between_sources(const std::filesystem::path& gen,
                                   const std::filesystem::path& ref,
                                   const RunConfig& cfg) {
  validate_config(cfg);
  FvmdReport report;
  const auto t0 = Clock::now();
  const auto gen_feats = features_for_source(gen, cfg, &report);
  const auto ref_feats = features_for_source(ref, cfg, &report);
  report.gen_clips = gen_feats.size();
  report.ref_clips = ref_feats.size();
  const auto t1 = Clock::now();
  report.score = fvmd(gen_feats, ref_feats, cfg.eps);
  report.t_frechet = seconds_since(t1);
  report.t_total = seconds_since(t0);
  return report;
}

std::vector<TrajectorySet> track_video_set(const std::filesystem::path& dir,
                                           const RunConfig& cfg) {
  validate_config(cfg);
  if (cfg.tracker == "import") {
    throw BadConfig("tracking a video set requires tracker 'builtin'");
  }
  const auto videos = load_video_set(dir, cfg, nullptr);
  const QueryGrid grid = init_grid(cfg.grid_n, kCanvas, kCanvas);
  std::vector<std::vector<TrajectorySet>> per_video(videos.size());
  std::string first_failure;
  std::mutex fail_mutex;
  parallel_for(videos.size(), cfg.workers, [&](std::size_t i) {
    try {
      const auto starts = segment_starts(videos[i].length(), clip_spec(cfg));
      per_video[i] =
          track_video(videos[i], starts, cfg.frames_per_clip, grid, cfg.lk);
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(fail_mutex);
      if (first_failure.empty()) first_failure = e.what();
      std::fprintf(stderr, "warning: skipping %s: %s\n", videos[i].id.c_str(),
                   e.what());
    }
  });
  std::vector<TrajectorySet> flat;
  for (auto& v : per_video) {
    for (auto& ts : v) flat.push_back(std::move(ts));
  }
  if (flat.empty()) {
    throw TooShort("no clips could be tracked in " + dir.string() + ": " +
                   first_failure);
  }
  return flat;
}

std::vector<SanityRow> sanity_rows(const std::vector<MotionFeature>& pool_a,
                                   const std::vector<MotionFeature>* pool_b,
                                   const std::vector<int>& sizes, int repeats,
                                   double eps, std::uint64_t seed) {
  if (sizes.empty()) throw BadConfig("no subset sizes given");
  if (repeats < 1) throw BadConfig("repeats must be positive");
  for (int size : sizes) {
    if (size < 2) throw BadConfig("subset size must be at least 2");
    if (2 * static_cast<std::size_t>(size) > pool_a.size()) {
      throw TooFewSamples("pool of " + std::to_string(pool_a.size()) +
                          " clips cannot host two disjoint subsets of " +
                          std::to_string(size));
    }
    if (pool_b && static_cast<std::size_t>(size) > pool_b->size()) {
      throw TooFewSamples("second pool of " + std::to_string(pool_b->size()) +
                          " clips cannot host a subset of " +
                          std::to_string(size));
    }
  }

  std::vector<SanityRow> rows;
  for (int size : sizes) {
    for (int rep = 0; rep < repeats; ++rep) {
      Rng rng_a(derive_seed(seed, "sanity_a/" + std::to_string(rep)));
      std::vector<std::uint64_t> idx_a =
          rng_a.sample_without_replacement(pool_a.size(), 2 * static_cast<std::size_t>(size));
      std::vector<MotionFeature> sub1, sub2;
      sub1.reserve(size);
      sub2.reserve(size);
      for (int i = 0; i < size; ++i) sub1.push_back(pool_a[idx_a[i]]);
      for (int i = 0; i < size; ++i) sub2.push_back(pool_a[idx_a[size + i]]);
      rows.push_back({size, rep, "same", fvmd(sub1, sub2, eps).value});
      if (pool_b) {
        Rng rng_b(derive_seed(seed, "sanity_b/" + std::to_string(rep)));
        const auto idx_b = rng_b.sample_without_replacement(
            pool_b->size(), static_cast<std::size_t>(size));
        std::vector<MotionFeature> subb;
        subb.reserve(size);
        for (int i = 0; i < size; ++i) subb.push_back((*pool_b)[idx_b[i]]);
        rows.push_back({size, rep, "cross", fvmd(sub1, subb, eps).value});
      }
    }
  }
  return rows;
}

namespace detail {

std::vector<VideoPlan> noise_plan(const std::vector<FrameSequence>& videos,
                                  NoiseKind kind, double intensity,
                                  std::uint64_t seed) {
  if (videos.empty()) throw NotEnoughVideos("no input videos");
  const int count = static_cast<int>(videos.size());
  const int L = videos.front().length();
  for (const auto& v : videos) {
    if (v.length() != L) throw NotEnoughVideos("videos differ in length: " + v.id);
  }
  std::vector<VideoPlan> plans;
  if (kind == NoiseKind::local_swap || kind == NoiseKind::global_swap) {
    plans.resize(videos.size());
    for (int v = 0; v < count; ++v) {
      const std::uint64_t vseed = derive_seed(seed, videos[v].id);
      const auto order = kind == NoiseKind::local_swap
                             ? local_swap_order(L, intensity, vseed)
                             : global_swap_order(L, intensity, vseed);
      VideoPlan plan(L);
      for (int t = 0; t < L; ++t) plan[t] = {v, order[t]};
      plans[v] = std::move(plan);
    }
    return plans;
  }

  const int n = static_cast<int>(intensity);
  if (n < 2 || static_cast<double>(n) != intensity) {
    throw BadConfig("tuple size must be an integer of at least 2");
  }
  const auto tuples = make_tuples(count, n, seed);
  for (const auto& tuple : tuples) {
    for (int o = 0; o < n; ++o) {
      VideoPlan plan(L);
      if (kind == NoiseKind::interleave) {
        for (int t = 0; t < L; ++t) plan[t] = {tuple[(o + t) % n], t};
      } else {
        for (int c = 0; c < n; ++c) {
          const int lo = static_cast<int>(static_cast<long long>(c) * L / n);
          const int hi = static_cast<int>(static_cast<long long>(c + 1) * L / n);
          for (int t = lo; t < hi; ++t) plan[t] = {tuple[(o + c) % n], t};
        }
      }
      plans.push_back(std::move(plan));
    }
  }
  return plans;
}

}  // namespace detail

std::vector<SensitivityRow> sensitivity_rows(
    const std::vector<FrameSequence>& gray_clean,
    const std::vector<NoiseKind>& kinds, const RunConfig& cfg) {
  validate_config(cfg);
  const auto clean_feats = features_for_videos(gray_clean, cfg);
  const double zero_score = fvmd(clean_feats, clean_feats, cfg.eps).value;

  std::vector<SensitivityRow> rows;
  for (const NoiseKind kind : kinds) {
    rows.push_back({noise_kind_name(kind), 0.0, zero_score});
    for (const double intensity : noise_presets(kind)) {
      const std::uint64_t base = derive_seed(
          cfg.seed, noise_kind_name(kind) + "@" + std::to_string(intensity));
      const auto plans = detail::noise_plan(gray_clean, kind, intensity, base);
      std::vector<std::vector<MotionFeature>> per_video(plans.size());
      parallel_for(plans.size(), cfg.workers, [&](std::size_t i) {
        FrameSequence seq;
        seq.id = "p" + std::to_string(i);
        seq.frames.reserve(plans[i].size());
        for (const auto& ref : plans[i]) {
          seq.frames.push_back(gray_clean[ref.video].frames[ref.frame]);
        }
        per_video[i] = features_from_gray(seq, cfg);
      });
      std::vector<MotionFeature> pert;
      for (auto& v : per_video) {
        for (auto& f : v) pert.push_back(std::move(f));
      }
      rows.push_back(
          {noise_kind_name(kind), intensity, fvmd(pert, clean_feats, cfg.eps).value});
    }
  }
  return rows;
}

}  // namespace fvmd
