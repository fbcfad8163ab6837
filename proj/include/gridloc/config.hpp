#pragma once

#include <map>
#include <string>

#include "gridloc/evaluation.hpp"

namespace gridloc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat run configuration behind the CLI: plain-text key=value files, flag
// overrides win, and the resolved form can be dumped and replayed.
struct RunConfig {
  std::string map_path = "maps/office.pgm";
  double resolution = 0.1;
  int threshold = 250;
  int channels = 128;
  std::string method = "sampled";  // blind | sampled | pf
  uint64_t seed = 1;
  double duration_s = 120.0;
  std::string out_dir = "results";

  // motion / odometry noise
  double sigma_x = 0.03;
  double sigma_y = 0.03;
  double sigma_theta = 0.012;
  double alpha_trans = 0.02;
  double alpha_rot = 0.02;
  double alpha_cross = 0.005;

  // observation model
  double sigma_hit = 0.2;
  double weight_floor = 0.05;
  int beam_stride = 4;
  int sample_budget = 512;

  // simulator
  double dt = 0.05;
  double speed = 0.5;
  double scan_period_s = 1.0;
  int beam_count = 24;
  double fov = 2.0 * M_PI;
  double max_range = 8.0;
  double range_noise = 0.0;

  double frame_period_s = 0.0;  // belief PNG cadence; 0 disables frames
  int threads = 0;              // 0 = hardware concurrency

  void apply(const std::string& key, const std::string& value);
  static RunConfig from_file(const std::string& path);
  static RunConfig from_map(const std::map<std::string, std::string>& kv);
  // Canonical key=value dump (sorted keys); parsing it back reproduces the
  // config exactly.
  std::string dump() const;

  Method method_enum() const;
  RunParams run_params() const;
};

std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace gridloc
