#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gridloc/localizer.hpp"
#include "gridloc/observation.hpp"
#include "gridloc/occupancy_map.hpp"
#include "gridloc/particle_filter.hpp"
#include "gridloc/simulator.hpp"
#include "gridloc/thread_pool.hpp"

namespace gridloc {

enum class Method { kBlind, kSampled, kParticleFilter };

std::string method_tag(Method m);

struct DifficultyConfig {
  double error_threshold = 1.0;  // C, meters
  int beam_count = 8;
  double fov = 2.0 * M_PI;
  double max_range = 8.0;
  int stride = 1;      // cell stride for both query and candidate poses
  int theta_bins = 8;  // candidate headings
  LikelihoodParams likelihood{0.2, 0.05, 1};
};

// Fraction of free cells whose single-scan best-match pose lies more than C
// meters from the truth. Candidates are scanned in a fixed order and ties
// keep the first maximum, so a cell whose scan is also matched perfectly by
// an earlier twin counts as wrongly localized.
double map_difficulty(const OccupancyMap& map, const DistanceField& field,
                      const DifficultyConfig& cfg, ThreadPool& pool);

struct RunParams {
  Method method = Method::kSampled;
  uint64_t seed = 1;
  double duration_s = 600.0;
  double max_distance_m = 0.0;  // 0 = no distance cutoff
  bool stop_when_converged = false;
  double dt = 0.05;
  double speed = 0.5;            // random-walk nominal speed, m/s
  double scan_period_s = 1.0;
  int beam_count = 24;
  double fov = 2.0 * M_PI;
  double max_range = 8.0;
  double range_noise = 0.0;
  double record_period_s = 0.25;
  OdometryNoiseModel odom_noise;
  LocalizerConfig localizer;
  PfParams pf;
  // Optional fixed start pose (used by scripted scenarios); NaN = random.
  Pose2 start{std::nan(""), std::nan(""), 0.0};
  // Invoked every frame_period_s of simulated time (dense methods only).
  double frame_period_s = 0.0;
  std::function<void(double, const BeliefTensor&)> frame_hook;
};

struct RecordRow {
  double t = 0.0;
  Pose2 truth;
  Pose2 estimate;
  double xy_error = 0.0;
  double theta_error_deg = 0.0;
  double distance = 0.0;
};

struct RunResult {
  std::vector<RecordRow> rows;
  std::string method;
  uint64_t seed = 0;
  double wall_clock_s = 0.0;
  double mean_step_ms = 0.0;
  int filter_steps = 0;
};

// One seeded random-walk run of the chosen method. Bit-reproducible for a
// fixed seed regardless of the pool's worker count.
RunResult run_localization(const OccupancyMap& map, const DistanceField& field,
                           const RunParams& params, ThreadPool& pool);

struct ConvergenceResult {
  bool converged = false;
  double distance = 0.0;  // distance traveled when the sustained window began
  double time = 0.0;
};

// First time xy_error drops below `threshold` and stays below it for
// `hold_s` of simulated time; any spike above the threshold resets the hold.
ConvergenceResult convergence_from_rows(const std::vector<RecordRow>& rows,
                                        double threshold = 0.10,
                                        double hold_s = 60.0);

struct ConvergenceSummary {
  std::vector<ConvergenceResult> runs;
  double min_distance = 0.0;
  double median_distance = 0.0;
  double max_distance = 0.0;
  int unconverged = 0;
};

ConvergenceSummary convergence_experiment(const OccupancyMap& map,
                                          const DistanceField& field,
                                          RunParams params,
                                          const std::vector<uint64_t>& seeds,
                                          double max_distance_m,
                                          ThreadPool& pool);

struct IntervalError {
  double start_s = 0.0;
  double end_s = 0.0;
  double mean_xy_m = 0.0;
  double mean_theta_deg = 0.0;
  std::size_t rows = 0;
};

// Mean errors over [0,60), [60,300), [300,duration) seconds.
std::vector<IntervalError> interval_errors(const std::vector<RecordRow>& rows,
                                           double duration_s);

struct LongTermResult {
  std::string method;
  std::vector<IntervalError> intervals;  // averaged across seeds
};

std::vector<LongTermResult> long_term_experiment(
    const OccupancyMap& map, const DistanceField& field, RunParams base,
    const std::vector<Method>& methods, double duration_s,
    const std::vector<uint64_t>& seeds, ThreadPool& pool);

// results/<map>/<method>/run_<seed>.csv layout.
void write_record_csv(const std::string& path, const RunResult& result);
void write_longterm_summary_csv(const std::string& path,
                                const std::vector<LongTermResult>& results);
void write_convergence_summary_csv(const std::string& path,
                                   const std::string& method,
                                   const ConvergenceSummary& summary);

// Deterministic random free pose (cell center) for a given seed.
Pose2 random_free_pose(const OccupancyMap& map, Rng& rng);

}  // namespace gridloc
