#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gridloc/belief_tensor.hpp"
#include "gridloc/config.hpp"
#include "gridloc/evaluation.hpp"
#include "gridloc/render.hpp"
#include "gridloc/worlds.hpp"

namespace fs = std::filesystem;
using namespace gridloc;

namespace {

struct CliFlags {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
};

RunConfig resolve_config(const CliFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty()) cfg = RunConfig::from_file(flags.config_path);
  for (const auto& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override must be key=value: " + kv);
    }
    cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (const char* root = std::getenv("GRIDLOC_RESULTS")) {
    if (cfg.out_dir == "results") cfg.out_dir = root;
  }
  return cfg;
}

OccupancyMap load_configured_map(const RunConfig& cfg) {
  if (!fs::exists(cfg.map_path)) {
    throw ConfigError("map file does not exist: " + cfg.map_path);
  }
  return load_map_file(cfg.map_path, cfg.threshold, cfg.resolution);
}

std::string map_stem(const RunConfig& cfg) {
  return fs::path(cfg.map_path).stem().string();
}

void dump_effective_config(const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.txt");
  out << cfg.dump();
}

int cmd_localize(const CliFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const OccupancyMap map = load_configured_map(cfg);
  const DistanceField field = distance_field(map);
  ThreadPool pool(cfg.threads);

  const fs::path run_dir =
      fs::path(cfg.out_dir) / map_stem(cfg) / cfg.method;
  fs::create_directories(run_dir);
  dump_effective_config(cfg, run_dir);

  RunParams params = cfg.run_params();
  params.frame_period_s = cfg.frame_period_s;
  int frame_no = 0;
  if (cfg.frame_period_s > 0.0) {
    params.frame_hook = [&](double, const BeliefTensor& tensor) {
      char name[64];
      std::snprintf(name, sizeof(name), "frame_%05d.png", frame_no++);
      render_belief_png((run_dir / name).string(), belief_map(tensor), map);
    };
  }

  const RunResult result = run_localization(map, field, params, pool);
  const std::string csv =
      (run_dir / ("run_" + std::to_string(cfg.seed) + ".csv")).string();
  write_record_csv(csv, result);
  render_trajectory_png((run_dir / ("trajectory_" + std::to_string(cfg.seed) +
                                    ".png")).string(),
                        map, result.rows);

  const ConvergenceResult conv = convergence_from_rows(result.rows);
  const double final_error =
      result.rows.empty() ? 0.0 : result.rows.back().xy_error;
  std::printf(
      "map=%s method=%s seed=%llu converged=%s conv_distance_m=%.2f "
      "final_error_m=%.3f mean_step_ms=%.3f rows=%zu -> %s\n",
      map_stem(cfg).c_str(), cfg.method.c_str(),
      static_cast<unsigned long long>(cfg.seed), conv.converged ? "yes" : "no",
      conv.distance, final_error, result.mean_step_ms, result.rows.size(),
      csv.c_str());
  return 0;
}

int cmd_evaluate(const CliFlags& flags, const std::string& experiment,
                 int n_seeds, double max_distance, double duration,
                 const std::string& methods_arg) {
  const RunConfig cfg = resolve_config(flags);
  const OccupancyMap map = load_configured_map(cfg);
  const DistanceField field = distance_field(map);
  ThreadPool pool(cfg.threads);
  const fs::path out_root = fs::path(cfg.out_dir) / map_stem(cfg);
  fs::create_directories(out_root);
  dump_effective_config(cfg, out_root);

  if (experiment == "difficulty") {
    DifficultyConfig dc;
    dc.beam_count = cfg.beam_count >= 16 ? 8 : cfg.beam_count;
    dc.max_range = cfg.max_range;
    dc.stride = 2;
    const double dm = map_difficulty(map, field, dc, pool);
    std::ofstream out(out_root / "difficulty.csv");
    out << "map,D_M,stride,beams\n"
        << map_stem(cfg) << "," << dm << "," << dc.stride << ","
        << dc.beam_count << "\n";
    std::printf("map=%s D_M=%.4f (stride=%d beams=%d)\n", map_stem(cfg).c_str(),
                dm, dc.stride, dc.beam_count);
    return 0;
  }

  if (experiment == "convergence") {
    if (n_seeds < 1) {
      std::fprintf(stderr, "error: convergence needs at least 1 seed\n");
      return 2;
    }
    std::vector<uint64_t> seeds;
    for (int s = 0; s < n_seeds; ++s) seeds.push_back(cfg.seed + s);
    RunParams params = cfg.run_params();
    params.duration_s = 1e9;  // distance-bounded
    const ConvergenceSummary summary = convergence_experiment(
        map, field, params, seeds, max_distance, pool);
    const std::string path =
        (out_root / (cfg.method + "_convergence.csv")).string();
    write_convergence_summary_csv(path, cfg.method, summary);
    std::printf(
        "map=%s method=%s runs=%zu median_m=%.2f min_m=%.2f max_m=%.2f "
        "unconverged=%d -> %s\n",
        map_stem(cfg).c_str(), cfg.method.c_str(), summary.runs.size(),
        summary.median_distance, summary.min_distance, summary.max_distance,
        summary.unconverged, path.c_str());
    return 0;
  }

  if (experiment == "longterm") {
    std::vector<Method> methods;
    std::stringstream ss(methods_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok == "blind") methods.push_back(Method::kBlind);
      else if (tok == "sampled") methods.push_back(Method::kSampled);
      else if (tok == "pf") methods.push_back(Method::kParticleFilter);
      else {
        std::fprintf(stderr, "error: unknown method '%s'\n", tok.c_str());
        return 2;
      }
    }
    std::vector<uint64_t> seeds;
    for (int s = 0; s < std::max(1, n_seeds); ++s) seeds.push_back(cfg.seed + s);
    const auto results = long_term_experiment(map, field, cfg.run_params(),
                                              methods, duration, seeds, pool);
    const std::string path = (out_root / "longterm_summary.csv").string();
    write_longterm_summary_csv(path, results);
    for (const auto& lt : results) {
      for (const auto& iv : lt.intervals) {
        std::printf("map=%s method=%s interval=[%.0f,%.0f)s xy=%.3fm "
                    "theta=%.3fdeg\n",
                    map_stem(cfg).c_str(), lt.method.c_str(), iv.start_s,
                    iv.end_s, iv.mean_xy_m, iv.mean_theta_deg);
      }
    }
    std::printf("-> %s\n", path.c_str());
    return 0;
  }

  std::fprintf(stderr,
               "error: unknown experiment '%s' (difficulty|convergence|"
               "longterm)\n",
               experiment.c_str());
  return 2;
}

struct PhaseStats {
  std::vector<double> samples;
  void add(double v) { samples.push_back(v); }
  double mean() const {
    double s = 0.0;
    for (double v : samples) s += v;
    return samples.empty() ? 0.0 : s / samples.size();
  }
  double quantile(double q) const {
    if (samples.empty()) return 0.0;
    std::vector<double> s = samples;
    std::sort(s.begin(), s.end());
    const std::size_t idx = static_cast<std::size_t>(q * (s.size() - 1));
    return s[idx];
  }
};

int cmd_bench(const CliFlags& flags, int width, int height, int channels,
              int steps) {
  const RunConfig cfg = resolve_config(flags);
  ThreadPool pool(cfg.threads);
  const OccupancyMap map = make_empty_room(width, height, cfg.resolution);
  const DistanceField field = distance_field(map);
  const MotionNoise noise{cfg.sigma_x, cfg.sigma_y, cfg.sigma_theta};
  const KernelSet kernels = build_kernels(noise, channels, map.resolution(),
                                          2.0 * M_PI / channels);
  const Activation act = make_activation(map, kernels, channels, pool);
  BeliefTensor tensor = init_uniform(map, channels);
  StepScratch scratch;

  PhaseStats motion, diffusion, masking, total, observation;
  const OdometryDelta u{map.resolution(), 0.0, 0.0};
  const LikelihoodParams lp{cfg.sigma_hit, cfg.weight_floor, cfg.beam_stride};
  Rng rng(cfg.seed);
  const Pose2 center{width * cfg.resolution * 0.5,
                     height * cfg.resolution * 0.5, 0.0};

  for (int s = 0; s < steps; ++s) {
    const auto t0 = std::chrono::steady_clock::now();
    step(tensor, u, map, kernels, act, pool, scratch);
    const auto t1 = std::chrono::steady_clock::now();
    motion.add(scratch.t_motion * 1e3);
    diffusion.add(scratch.t_diffusion * 1e3);
    masking.add(scratch.t_masking * 1e3);
    total.add(std::chrono::duration<double>(t1 - t0).count() * 1e3);

    if (s % 16 == 0) {
      const LidarScan scan = simulate_scan(map, center, cfg.beam_count, cfg.fov,
                                           cfg.max_range, 0.0, rng);
      const auto o0 = std::chrono::steady_clock::now();
      const SampleSet samples = dither_samples(belief_map(tensor),
                                               cfg.sample_budget);
      observation_update(tensor, samples, scan, map, field, lp, pool);
      const auto o1 = std::chrono::steady_clock::now();
      observation.add(std::chrono::duration<double>(o1 - o0).count() * 1e3);
    }
  }

  std::printf("bench %dx%dx%d, %d steps, %d threads\n", width, height,
              channels, steps, pool.thread_count());
  const auto report = [](const char* name, const PhaseStats& st) {
    std::printf("  %-12s mean=%8.3f ms  median=%8.3f ms  p99=%8.3f ms\n", name,
                st.mean(), st.quantile(0.5), st.quantile(0.99));
  };
  report("motion", motion);
  report("diffusion", diffusion);
  report("masking", masking);
  report("blind-step", total);
  report("observation", observation);
  return 0;
}

int cmd_render(const CliFlags& flags, const std::string& snapshot,
               const std::string& out_png) {
  const RunConfig cfg = resolve_config(flags);
  const OccupancyMap map = load_configured_map(cfg);
  const BeliefTensor tensor = read_belief_snapshot(
      snapshot, map.resolution(), map.origin_x(), map.origin_y());
  render_belief_png(out_png, belief_map(tensor), map);
  std::printf("rendered %s -> %s\n", snapshot.c_str(), out_png.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "gridloc: dense SE(2) belief-grid localization with map-corrected "
      "odometry and sampled LIDAR updates"};
  app.require_subcommand(1);

  CliFlags flags;
  app.add_option("--config", flags.config_path, "key=value config file");
  app.add_option("--set", flags.overrides,
                 "config override key=value (repeatable; wins over --config)");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config_path, "key=value config file");
    sub->add_option("--set", flags.overrides, "config override key=value");
    sub->add_option_function<std::string>(
        "--map", [&](const std::string& v) { flags.overrides.push_back("map=" + v); },
        "map image path (PGM/PNG)");
    sub->add_option_function<std::string>(
        "--method",
        [&](const std::string& v) { flags.overrides.push_back("method=" + v); },
        "blind | sampled | pf");
    sub->add_option_function<std::string>(
        "--seed",
        [&](const std::string& v) { flags.overrides.push_back("seed=" + v); },
        "run seed");
    sub->add_option_function<std::string>(
        "--out",
        [&](const std::string& v) { flags.overrides.push_back("out_dir=" + v); },
        "output directory root");
  };

  auto* localize = app.add_subcommand("localize", "run one seeded simulation + filter");
  add_common(localize);

  auto* evaluate = app.add_subcommand("evaluate", "run an experiment family");
  add_common(evaluate);
  std::string experiment;
  int n_seeds = 20;
  double max_distance = 150.0;
  double duration = 600.0;
  std::string methods_arg = "sampled,blind";
  evaluate->add_option("experiment", experiment,
                       "difficulty | convergence | longterm")->required();
  evaluate->add_option("--seeds", n_seeds, "number of seeded runs");
  evaluate->add_option("--max-distance", max_distance,
                       "convergence distance cutoff, m");
  evaluate->add_option("--duration", duration, "longterm run length, s");
  evaluate->add_option("--methods", methods_arg, "longterm methods, comma list");

  auto* bench = app.add_subcommand("bench", "per-phase step timing");
  add_common(bench);
  int bw = 512, bh = 512, bc = 128, bsteps = 1000;
  bench->add_option("--width", bw, "tensor width");
  bench->add_option("--height", bh, "tensor height");
  bench->add_option("--channels", bc, "tensor channels");
  bench->add_option("--steps", bsteps, "steps to time");

  auto* render = app.add_subcommand("render", "re-render a belief snapshot");
  add_common(render);
  std::string snapshot, out_png = "belief.png";
  render->add_option("--snapshot", snapshot, "belief snapshot (.blf)")->required();
  render->add_option("--png", out_png, "output PNG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (localize->parsed()) return cmd_localize(flags);
    if (evaluate->parsed()) {
      return cmd_evaluate(flags, experiment, n_seeds, max_distance, duration,
                          methods_arg);
    }
    if (bench->parsed()) return cmd_bench(flags, bw, bh, bc, bsteps);
    if (render->parsed()) return cmd_render(flags, snapshot, out_png);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
