#include "gridloc/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace gridloc {

std::string method_tag(Method m) {
  switch (m) {
    case Method::kBlind:
      return "blind";
    case Method::kSampled:
      return "sampled";
    case Method::kParticleFilter:
      return "pf";
  }
  return "unknown";
}

double map_difficulty(const OccupancyMap& map, const DistanceField& field,
                      const DifficultyConfig& cfg, ThreadPool& pool) {
  const int stride = std::max(1, cfg.stride);
  std::vector<std::pair<int, int>> cells;
  for (int j = 1; j < map.height() - 1; j += stride) {
    for (int i = 1; i < map.width() - 1; i += stride) {
      if (map.free(i, j)) cells.emplace_back(i, j);
    }
  }
  if (cells.empty()) return 0.0;

  std::vector<double> test_angles(cfg.theta_bins);
  for (int a = 0; a < cfg.theta_bins; ++a) {
    test_angles[a] = wrap_angle(2.0 * M_PI * a / cfg.theta_bins);
  }

  std::vector<uint8_t> wrong(cells.size(), 0);
  Rng unused(0);
  pool.parallel_for(0, cells.size(), [&](std::size_t q) {
    const auto [qi, qj] = cells[q];
    Rng rng(0);  // scans are noise-free; the stream is never consumed
    const Pose2 query{map.center_x(qi), map.center_y(qj), 0.0};
    const LidarScan scan = simulate_scan(map, query, cfg.beam_count, cfg.fov,
                                         cfg.max_range, 0.0, rng);
    double best = -1.0;
    std::size_t best_cell = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      Pose2 cand{map.center_x(cells[c].first), map.center_y(cells[c].second),
                 0.0};
      for (double a : test_angles) {
        cand.theta = a;
        const double l = scan_likelihood(map, field, cand, scan, cfg.likelihood);
        if (l > best) {
          best = l;
          best_cell = c;
        }
      }
    }
    const double e = std::hypot(
        map.center_x(cells[best_cell].first) - query.x,
        map.center_y(cells[best_cell].second) - query.y);
    wrong[q] = e > cfg.error_threshold ? 1 : 0;
  });

  std::size_t n_wrong = 0;
  for (uint8_t w : wrong) n_wrong += w;
  return static_cast<double>(n_wrong) / static_cast<double>(cells.size());
}

Pose2 random_free_pose(const OccupancyMap& map, Rng& rng) {
  for (int tries = 0; tries < 100000; ++tries) {
    const int i = 1 + static_cast<int>(rng.uniform_int(map.width() - 2));
    const int j = 1 + static_cast<int>(rng.uniform_int(map.height() - 2));
    if (map.free(i, j)) {
      return Pose2{map.center_x(i), map.center_y(j),
                   wrap_angle(rng.uniform(-M_PI, M_PI))};
    }
  }
  throw std::runtime_error("could not draw a free start pose");
}

RunResult run_localization(const OccupancyMap& map, const DistanceField& field,
                           const RunParams& params, ThreadPool& pool) {
  using clock = std::chrono::steady_clock;
  const auto wall_start = clock::now();

  Rng rng(params.seed);
  RobotState robot;
  robot.pose = std::isnan(params.start.x) ? random_free_pose(map, rng)
                                          : params.start;
  if (!map.world_free(robot.pose.x, robot.pose.y)) {
    throw std::invalid_argument("start pose is not in free space");
  }

  RandomWalkPolicy policy;
  policy.nominal_speed = params.speed;

  LocalizerConfig lcfg = params.localizer;
  lcfg.use_samples = params.method == Method::kSampled;
  std::unique_ptr<Localizer> localizer;
  ParticleSet pf_set;
  OdometryDelta pf_pending{};
  const bool dense = params.method != Method::kParticleFilter;
  if (dense) {
    localizer = std::make_unique<Localizer>(map, field, lcfg, pool);
  } else {
    const LidarScan scan0 = simulate_scan(map, robot.pose, params.beam_count,
                                          params.fov, params.max_range,
                                          params.range_noise, rng);
    pf_set = pf_init(map, field, scan0, lcfg.likelihood, params.pf, rng);
  }

  RunResult result;
  result.method = method_tag(params.method);
  result.seed = params.seed;

  double next_scan = params.scan_period_s;
  double next_record = 0.0;
  double next_frame = params.frame_period_s;
  double filter_time = 0.0;
  ConvergenceResult online;
  double window_start_t = -1.0, window_start_d = 0.0;

  const auto estimate_now = [&]() -> Pose2 {
    if (dense) return localizer->estimate().pose;
    Pose2 est = compose(pf_estimate(pf_set), pf_pending);
    est.theta = wrap_angle(est.theta);
    return est;
  };

  while (robot.time < params.duration_s &&
         (params.max_distance_m <= 0.0 ||
          robot.distance_traveled < params.max_distance_m)) {
    const Command cmd = policy.next(robot, map, rng);
    const RobotState next = step_robot(robot, cmd, params.dt, map);
    const OdometryDelta true_delta = relative_delta(robot.pose, next.pose);
    const OdometryDelta measured =
        odometry_measurement(true_delta, params.odom_noise, rng);
    robot = next;

    const auto f0 = clock::now();
    if (dense) {
      localizer->integrate_odometry(measured);
    } else {
      pf_pending = compose_delta(pf_pending, measured);
    }
    if (robot.time + 1e-9 >= next_scan) {
      next_scan += params.scan_period_s;
      const LidarScan scan = simulate_scan(map, robot.pose, params.beam_count,
                                           params.fov, params.max_range,
                                           params.range_noise, rng);
      if (dense) {
        localizer->observe(scan);  // no-op for the blind method
      } else {
        pf_step(pf_set, pf_pending, scan, map, field, params.odom_noise,
                lcfg.likelihood, params.pf, rng);
        pf_pending = OdometryDelta{};
      }
    }
    filter_time += std::chrono::duration<double>(clock::now() - f0).count();

    if (dense && params.frame_period_s > 0.0 && params.frame_hook &&
        robot.time + 1e-9 >= next_frame) {
      next_frame += params.frame_period_s;
      params.frame_hook(robot.time, localizer->belief());
    }

    if (robot.time + 1e-9 >= next_record) {
      next_record += params.record_period_s;
      RecordRow row;
      row.t = robot.time;
      row.truth = robot.pose;
      row.estimate = estimate_now();
      row.xy_error = distance(row.truth, row.estimate);
      row.theta_error_deg =
          angle_diff(row.truth.theta, row.estimate.theta) * 180.0 / M_PI;
      row.distance = robot.distance_traveled;
      result.rows.push_back(row);

      // Online convergence bookkeeping for early stopping.
      if (row.xy_error < 0.10) {
        if (window_start_t < 0.0) {
          window_start_t = row.t;
          window_start_d = row.distance;
        } else if (row.t - window_start_t >= 60.0 && !online.converged) {
          online.converged = true;
          online.time = window_start_t;
          online.distance = window_start_d;
          if (params.stop_when_converged) break;
        }
      } else {
        window_start_t = -1.0;
      }
    }
  }

  result.wall_clock_s =
      std::chrono::duration<double>(clock::now() - wall_start).count();
  result.filter_steps = dense ? localizer->steps_run() : 0;
  const int denom = std::max(1, result.filter_steps);
  result.mean_step_ms = dense ? filter_time * 1000.0 / denom : 0.0;
  return result;
}

ConvergenceResult convergence_from_rows(const std::vector<RecordRow>& rows,
                                        double threshold, double hold_s) {
  ConvergenceResult out;
  double window_t = -1.0, window_d = 0.0;
  for (const auto& row : rows) {
    if (row.xy_error < threshold) {
      if (window_t < 0.0) {
        window_t = row.t;
        window_d = row.distance;
      } else if (row.t - window_t >= hold_s) {
        out.converged = true;
        out.time = window_t;
        out.distance = window_d;
        return out;
      }
    } else {
      window_t = -1.0;
    }
  }
  return out;
}

ConvergenceSummary convergence_experiment(const OccupancyMap& map,
                                          const DistanceField& field,
                                          RunParams params,
                                          const std::vector<uint64_t>& seeds,
                                          double max_distance_m,
                                          ThreadPool& pool) {
  if (seeds.empty()) throw std::invalid_argument("need at least one seed");
  ConvergenceSummary summary;
  params.max_distance_m = max_distance_m;
  params.stop_when_converged = true;
  for (uint64_t seed : seeds) {
    params.seed = seed;
    const RunResult run = run_localization(map, field, params, pool);
    ConvergenceResult c = convergence_from_rows(run.rows);
    summary.runs.push_back(c);
  }
  std::vector<double> dists;
  for (const auto& r : summary.runs) {
    if (r.converged) {
      dists.push_back(r.distance);
    } else {
      ++summary.unconverged;
    }
  }
  if (!dists.empty()) {
    std::sort(dists.begin(), dists.end());
    summary.min_distance = dists.front();
    summary.max_distance = dists.back();
    summary.median_distance = dists[dists.size() / 2];
  }
  return summary;
}

std::vector<IntervalError> interval_errors(const std::vector<RecordRow>& rows,
                                           double duration_s) {
  const double bounds[4] = {0.0, 60.0, 300.0, duration_s};
  std::vector<IntervalError> out(3);
  for (int b = 0; b < 3; ++b) {
    out[b].start_s = bounds[b];
    out[b].end_s = bounds[b + 1];
  }
  for (const auto& row : rows) {
    for (int b = 0; b < 3; ++b) {
      if (row.t >= bounds[b] && row.t < bounds[b + 1]) {
        out[b].mean_xy_m += row.xy_error;
        out[b].mean_theta_deg += row.theta_error_deg;
        ++out[b].rows;
      }
    }
  }
  for (auto& iv : out) {
    if (iv.rows > 0) {
      iv.mean_xy_m /= static_cast<double>(iv.rows);
      iv.mean_theta_deg /= static_cast<double>(iv.rows);
    }
  }
  return out;
}

std::vector<LongTermResult> long_term_experiment(
    const OccupancyMap& map, const DistanceField& field, RunParams base,
    const std::vector<Method>& methods, double duration_s,
    const std::vector<uint64_t>& seeds, ThreadPool& pool) {
  if (duration_s < 600.0) {
    throw std::invalid_argument("long-term runs need duration >= 600 s");
  }
  base.duration_s = duration_s;
  base.max_distance_m = 0.0;
  base.stop_when_converged = false;
  std::vector<LongTermResult> results;
  for (Method m : methods) {
    base.method = m;
    LongTermResult lt;
    lt.method = method_tag(m);
    lt.intervals = std::vector<IntervalError>(3);
    std::vector<IntervalError> acc(3);
    for (uint64_t seed : seeds) {
      base.seed = seed;
      const RunResult run = run_localization(map, field, base, pool);
      const auto iv = interval_errors(run.rows, duration_s);
      for (int b = 0; b < 3; ++b) {
        acc[b].start_s = iv[b].start_s;
        acc[b].end_s = iv[b].end_s;
        acc[b].mean_xy_m += iv[b].mean_xy_m;
        acc[b].mean_theta_deg += iv[b].mean_theta_deg;
        acc[b].rows += iv[b].rows;
      }
    }
    for (int b = 0; b < 3; ++b) {
      acc[b].mean_xy_m /= static_cast<double>(seeds.size());
      acc[b].mean_theta_deg /= static_cast<double>(seeds.size());
    }
    lt.intervals = acc;
    results.push_back(std::move(lt));
  }
  return results;
}

void write_record_csv(const std::string& path, const RunResult& result) {
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t,gt_x,gt_y,gt_theta,est_x,est_y,est_theta,xy_error_m,"
         "theta_error_deg,distance_m,method,seed\n";
  char buf[512];
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%s,%llu\n",
                  r.t, r.truth.x, r.truth.y, r.truth.theta, r.estimate.x,
                  r.estimate.y, r.estimate.theta, r.xy_error, r.theta_error_deg,
                  r.distance, result.method.c_str(),
                  static_cast<unsigned long long>(result.seed));
    out << buf;
  }
}

void write_longterm_summary_csv(const std::string& path,
                                const std::vector<LongTermResult>& results) {
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "method,interval_start_s,interval_end_s,mean_xy_error_m,"
         "mean_theta_error_deg\n";
  char buf[256];
  for (const auto& lt : results) {
    for (const auto& iv : lt.intervals) {
      std::snprintf(buf, sizeof(buf), "%s,%.0f,%.0f,%.6f,%.6f\n",
                    lt.method.c_str(), iv.start_s, iv.end_s, iv.mean_xy_m,
                    iv.mean_theta_deg);
      out << buf;
    }
  }
}

void write_convergence_summary_csv(const std::string& path,
                                   const std::string& method,
                                   const ConvergenceSummary& summary) {
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "method,run,converged,distance_m,time_s\n";
  char buf[256];
  for (std::size_t r = 0; r < summary.runs.size(); ++r) {
    const auto& c = summary.runs[r];
    std::snprintf(buf, sizeof(buf), "%s,%zu,%d,%.3f,%.3f\n", method.c_str(), r,
                  c.converged ? 1 : 0, c.distance, c.time);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "# min=%.3f median=%.3f max=%.3f unconverged=%d\n",
                summary.min_distance, summary.median_distance,
                summary.max_distance, summary.unconverged);
  out << buf;
}

}  // namespace gridloc
