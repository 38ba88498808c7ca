#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fvmd/errors.hpp"
#include "fvmd/pipeline.hpp"

namespace {

using nlohmann::json;

struct CliOptions {
  fvmd::RunConfig run;
  std::string fields = "combined";
  std::string hist = "1d";
  std::string config_path;
};

fvmd::FeatureFields parse_fields(const std::string& s) {
  if (s == "velocity") return fvmd::FeatureFields::velocity;
  if (s == "acceleration") return fvmd::FeatureFields::acceleration;
  if (s == "combined") return fvmd::FeatureFields::combined;
  throw fvmd::BadConfig("unknown fields: " + s);
}

fvmd::HistKind parse_hist(const std::string& s) {
  if (s == "1d") return fvmd::HistKind::h1d;
  if (s == "2d") return fvmd::HistKind::h2d;
  throw fvmd::BadConfig("unknown histogram kind: " + s);
}

std::string fields_name(fvmd::FeatureFields f) {
  switch (f) {
    case fvmd::FeatureFields::velocity: return "velocity";
    case fvmd::FeatureFields::acceleration: return "acceleration";
    default: return "combined";
  }
}

// Adds the shared pipeline flags to a subcommand. Values given in a JSON
// config file apply first; explicit flags override them.
void add_config_flags(CLI::App* sub, CliOptions& opt) {
  sub->add_option("--frames-per-clip", opt.run.frames_per_clip,
                  "Frames per clip window");
  sub->add_option("--stride", opt.run.stride, "Clip window stride");
  sub->add_option("--grid-n", opt.run.grid_n,
                  "Tracked points per clip (perfect square)");
  sub->add_option("--volume-f", opt.run.volume.f, "Frames per histogram volume");
  sub->add_option("--volume-k", opt.run.volume.k,
                  "Grid points per volume side");
  sub->add_option("--fields", opt.fields,
                  "Motion fields: velocity|acceleration|combined");
  sub->add_option("--hist", opt.hist, "Histogram kind: 1d|2d");
  sub->add_option("--tracker", opt.run.tracker, "Tracker: builtin|import");
  sub->add_option("--eps", opt.run.eps, "Covariance regularizer");
  sub->add_option("--seed", opt.run.seed, "Master seed");
  sub->add_option("--workers", opt.run.workers,
                  "Worker threads (0 = hardware)");
  sub->add_option("--config", opt.config_path, "JSON config file");
}

void apply_json_config(const CLI::App* sub, CliOptions& opt) {
  if (opt.config_path.empty()) return;
  std::ifstream in(opt.config_path);
  if (!in) throw fvmd::BadConfig("cannot open config " + opt.config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw fvmd::BadConfig("cannot parse config " + opt.config_path + ": " +
                          e.what());
  }
  auto flag_given = [&](const char* name) {
    const CLI::Option* o = sub->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  try {
    if (cfg.contains("frames_per_clip") && !flag_given("--frames-per-clip"))
      opt.run.frames_per_clip = cfg["frames_per_clip"].get<int>();
    if (cfg.contains("stride") && !flag_given("--stride"))
      opt.run.stride = cfg["stride"].get<int>();
    if (cfg.contains("grid_n") && !flag_given("--grid-n"))
      opt.run.grid_n = cfg["grid_n"].get<int>();
    if (cfg.contains("volume_f") && !flag_given("--volume-f"))
      opt.run.volume.f = cfg["volume_f"].get<int>();
    if (cfg.contains("volume_k") && !flag_given("--volume-k"))
      opt.run.volume.k = cfg["volume_k"].get<int>();
    if (cfg.contains("fields") && !flag_given("--fields"))
      opt.fields = cfg["fields"].get<std::string>();
    if (cfg.contains("hist") && !flag_given("--hist"))
      opt.hist = cfg["hist"].get<std::string>();
    if (cfg.contains("tracker") && !flag_given("--tracker"))
      opt.run.tracker = cfg["tracker"].get<std::string>();
    if (cfg.contains("eps") && !flag_given("--eps"))
      opt.run.eps = cfg["eps"].get<double>();
    if (cfg.contains("seed") && !flag_given("--seed"))
      opt.run.seed = cfg["seed"].get<std::uint64_t>();
    if (cfg.contains("workers") && !flag_given("--workers"))
      opt.run.workers = cfg["workers"].get<int>();
    if (cfg.contains("raw_magnitude_1d"))
      opt.run.raw_magnitude_1d = cfg["raw_magnitude_1d"].get<bool>();
    if (cfg.contains("lk")) {
      const auto& lk = cfg["lk"];
      opt.run.lk.pyramid_levels =
          lk.value("pyramid_levels", opt.run.lk.pyramid_levels);
      opt.run.lk.window_radius =
          lk.value("window_radius", opt.run.lk.window_radius);
      opt.run.lk.max_iterations =
          lk.value("max_iterations", opt.run.lk.max_iterations);
      opt.run.lk.convergence_epsilon =
          lk.value("convergence_epsilon", opt.run.lk.convergence_epsilon);
      opt.run.lk.min_eigenvalue =
          lk.value("min_eigenvalue", opt.run.lk.min_eigenvalue);
    }
  } catch (const json::exception& e) {
    throw fvmd::BadConfig("bad value in config " + opt.config_path + ": " +
                          e.what());
  }
}

void finalize_config(const CLI::App* sub, CliOptions& opt) {
  apply_json_config(sub, opt);
  opt.run.fields = parse_fields(opt.fields);
  opt.run.hist = parse_hist(opt.hist);
  fvmd::validate_config(opt.run);
}

json config_json(const fvmd::RunConfig& run) {
  return json{{"frames_per_clip", run.frames_per_clip},
              {"stride", run.stride},
              {"grid_n", run.grid_n},
              {"volume_f", run.volume.f},
              {"volume_k", run.volume.k},
              {"fields", fields_name(run.fields)},
              {"hist", run.hist == fvmd::HistKind::h2d ? "2d" : "1d"},
              {"tracker", run.tracker},
              {"eps", run.eps},
              {"seed", run.seed},
              {"workers", run.workers},
              {"raw_magnitude_1d", run.raw_magnitude_1d},
              {"lk",
               {{"pyramid_levels", run.lk.pyramid_levels},
                {"window_radius", run.lk.window_radius},
                {"max_iterations", run.lk.max_iterations},
                {"convergence_epsilon", run.lk.convergence_epsilon},
                {"min_eigenvalue", run.lk.min_eigenvalue}}}};
}

json report_json(const fvmd::FvmdReport& rep, const fvmd::RunConfig& run) {
  return json{
      {"score",
       {{"value", rep.score.value},
        {"d", rep.score.dim},
        {"n_gen", rep.score.n_gen},
        {"n_ref", rep.score.n_ref},
        {"eps", rep.score.eps},
        {"clamp_removed", rep.score.clamp_removed},
        {"feature_config",
         {{"fields", fields_name(run.fields)},
          {"hist", run.hist == fvmd::HistKind::h2d ? "2d" : "1d"},
          {"volume_f", run.volume.f},
          {"volume_k", run.volume.k}}},
        {"tracker_source", run.tracker},
        {"library_version", fvmd::kLibraryVersion}}},
      {"clips", {{"gen", rep.gen_clips}, {"ref", rep.ref_clips}}},
      {"timings_sec",
       {{"load", rep.t_load},
        {"track", rep.t_track},
        {"features", rep.t_features},
        {"frechet", rep.t_frechet},
        {"total", rep.t_total}}},
      {"config", config_json(run)}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw fvmd::WriteError("cannot open " + path);
  out << text;
  if (!out) throw fvmd::WriteError("cannot write " + path);
}

std::vector<int> parse_sizes(const std::string& csv) {
  std::vector<int> sizes;
  std::string tok;
  for (std::size_t i = 0; i <= csv.size(); ++i) {
    if (i == csv.size() || csv[i] == ',') {
      if (!tok.empty()) {
        sizes.push_back(std::stoi(tok));
        tok.clear();
      }
    } else {
      tok.push_back(csv[i]);
    }
  }
  if (sizes.empty()) throw fvmd::BadConfig("no subset sizes given");
  return sizes;
}

std::vector<fvmd::NoiseKind> parse_noises(const std::string& csv) {
  std::vector<fvmd::NoiseKind> kinds;
  std::string tok;
  for (std::size_t i = 0; i <= csv.size(); ++i) {
    if (i == csv.size() || csv[i] == ',') {
      if (!tok.empty()) {
        kinds.push_back(fvmd::parse_noise_kind(tok));
        tok.clear();
      }
    } else {
      tok.push_back(csv[i]);
    }
  }
  if (kinds.empty()) throw fvmd::BadConfig("no noise kinds given");
  return kinds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fréchet video motion distance over keypoint trajectories"};
  app.require_subcommand(1);

  CliOptions opt;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic video set");
  std::string synth_out, synth_law = "const", synth_format = "png";
  int synth_videos = 16;
  fvmd::SynthParams sp;
  synth->add_option("--out", synth_out, "Output video-set directory")->required();
  synth->add_option("--videos", synth_videos, "Video count");
  synth->add_option("--frames", sp.frames, "Frames per video");
  synth->add_option("--law", synth_law, "Motion law: const|sine|walk");
  synth->add_option("--format", synth_format, "Frame format: png|pgm|ppm");
  synth->add_option("--seed", sp.seed, "Master seed");
  synth->add_option("--width", sp.width, "Frame width");
  synth->add_option("--height", sp.height, "Frame height");
  synth->add_option("--contrast-min", sp.contrast_min, "Contrast range low");
  synth->add_option("--contrast-max", sp.contrast_max, "Contrast range high");

  // track
  auto* track = app.add_subcommand("track", "Track a video set into an FVMDTRAJ file");
  std::string track_videos, track_out;
  track->add_option("--videos", track_videos, "Video-set directory")->required();
  track->add_option("--out", track_out, "Output FVMDTRAJ path")->required();
  add_config_flags(track, opt);

  // compute
  auto* compute = app.add_subcommand("compute", "Score one set against another");
  std::string gen_src, ref_src, compute_out;
  compute->add_option("--gen", gen_src, "Generated set: directory or FVMDTRAJ")
      ->required();
  compute->add_option("--ref", ref_src, "Reference set: directory or FVMDTRAJ")
      ->required();
  compute->add_option("--out", compute_out, "Also write the JSON report here");
  add_config_flags(compute, opt);

  // sanity
  auto* sanity = app.add_subcommand(
      "sanity", "Disjoint-subset convergence protocol over one or two sets");
  std::string san_videos, san_videos_b, san_traj, san_traj_b, san_out;
  std::string san_sizes = "64,128,256,512";
  int san_repeats = 5;
  sanity->add_option("--videos", san_videos, "Video-set directory");
  sanity->add_option("--videos-b", san_videos_b, "Second set for cross rows");
  sanity->add_option("--trajectories", san_traj, "FVMDTRAJ instead of --videos");
  sanity->add_option("--trajectories-b", san_traj_b,
                     "FVMDTRAJ instead of --videos-b");
  sanity->add_option("--sizes", san_sizes, "Comma-separated subset sizes");
  sanity->add_option("--repeats", san_repeats, "Repeats per size");
  sanity->add_option("--out", san_out, "CSV output path (default stdout)");
  add_config_flags(sanity, opt);

  // sensitivity
  auto* sens = app.add_subcommand(
      "sensitivity", "Temporal-noise sweep scored against the clean set");
  std::string sens_videos, sens_out;
  std::string sens_noises = "local_swap,global_swap,interleave,switch";
  sens->add_option("--videos", sens_videos, "Video-set directory")->required();
  sens->add_option("--noises", sens_noises, "Comma-separated noise kinds");
  sens->add_option("--out", sens_out, "CSV output path (default stdout)");
  add_config_flags(sens, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      sp.law = fvmd::parse_motion_law(synth_law);
      fvmd::synth_dataset(synth_out, synth_videos, sp, synth_format);
      std::printf("wrote %d videos to %s\n", synth_videos, synth_out.c_str());
      return 0;
    }

    if (track->parsed()) {
      finalize_config(track, opt);
      const auto sets = fvmd::track_video_set(track_videos, opt.run);
      fvmd::export_trajectories(sets, track_out);
      std::printf("wrote %zu clips to %s\n", sets.size(), track_out.c_str());
      return 0;
    }

    if (compute->parsed()) {
      finalize_config(compute, opt);
      const auto report = fvmd::compute_between_sources(gen_src, ref_src, opt.run);
      const std::string text = report_json(report, opt.run).dump(2);
      std::printf("%s\n", text.c_str());
      if (!compute_out.empty()) write_text(compute_out, text + "\n");
      return 0;
    }

    if (sanity->parsed()) {
      finalize_config(sanity, opt);
      const bool have_a = !san_videos.empty() || !san_traj.empty();
      if (!have_a) throw fvmd::BadConfig("sanity needs --videos or --trajectories");
      if (!san_videos.empty() && !san_traj.empty()) {
        throw fvmd::BadConfig("give either --videos or --trajectories, not both");
      }
      const std::string src_a = san_videos.empty() ? san_traj : san_videos;
      const auto pool_a = fvmd::features_for_source(src_a, opt.run, nullptr);
      std::optional<std::vector<fvmd::MotionFeature>> pool_b;
      if (!san_videos_b.empty() || !san_traj_b.empty()) {
        const std::string src_b = san_videos_b.empty() ? san_traj_b : san_videos_b;
        pool_b = fvmd::features_for_source(src_b, opt.run, nullptr);
      }
      const auto rows = fvmd::sanity_rows(pool_a, pool_b ? &*pool_b : nullptr,
                                          parse_sizes(san_sizes), san_repeats,
                                          opt.run.eps, opt.run.seed);
      std::string csv = "# fvmd-sanity v1\nsize,repeat,comparison,score\n";
      char line[128];
      for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%d,%d,%s,%.9g\n", r.size, r.repeat,
                      r.comparison.c_str(), r.score);
        csv += line;
      }
      if (san_out.empty()) {
        std::fputs(csv.c_str(), stdout);
      } else {
        write_text(san_out, csv);
      }
      return 0;
    }

    if (sens->parsed()) {
      finalize_config(sens, opt);
      const auto vdirs = fvmd::list_video_dirs(sens_videos);
      if (vdirs.empty()) {
        throw fvmd::NoFrames("no video directories in " + sens_videos);
      }
      std::vector<fvmd::FrameSequence> clean(vdirs.size());
      fvmd::parallel_for(vdirs.size(), opt.run.workers, [&](std::size_t i) {
        clean[i] = fvmd::gray_sequence(
            fvmd::preprocess(fvmd::load_frames(vdirs[i])));
      });
      const auto rows =
          fvmd::sensitivity_rows(clean, parse_noises(sens_noises), opt.run);
      std::string csv = "# fvmd-sensitivity v1\nkind,intensity,score\n";
      char line[128];
      for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%s,%g,%.9g\n", r.kind.c_str(),
                      r.intensity, r.score);
        csv += line;
      }
      if (sens_out.empty()) {
        std::fputs(csv.c_str(), stdout);
      } else {
        write_text(sens_out, csv);
      }
      return 0;
    }
  } catch (const fvmd::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
