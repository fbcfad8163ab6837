#pragma once

#include "gridloc/geometry.hpp"
#include "gridloc/observation.hpp"
#include "gridloc/occupancy_map.hpp"
#include "gridloc/rng.hpp"

namespace gridloc {

struct RobotState {
  Pose2 pose;
  double time = 0.0;
  double distance_traveled = 0.0;
};

struct Command {
  double speed = 0.0;  // m/s forward
  double turn = 0.0;   // rad/s
};

struct OdometryNoiseModel {
  double alpha_trans = 0.02;  // translation std per meter traveled
  double alpha_rot = 0.02;    // rotation std per radian turned
  double alpha_cross = 0.005; // rotation std induced per meter traveled
};

// Unicycle integration with exact arcs. If the translated pose lands in an
// occupied cell the translation is cancelled and only the rotation is kept;
// the robot never penetrates walls.
RobotState step_robot(const RobotState& state, const Command& cmd, double dt,
                      const OccupancyMap& map);

// Random walk with no external guidance: forward at nominal speed with small
// heading jitter; when the ray ahead is short, spin in a direction chosen
// uniformly at random until clear again.
class RandomWalkPolicy {
 public:
  double nominal_speed = 0.5;   // m/s
  double clear_distance = 0.5;  // m; below this the robot turns in place
  double spin_rate = 1.2;       // rad/s while blocked
  double jitter_rate = 0.12;    // std of the per-step turn command, rad/s

  Command next(const RobotState& state, const OccupancyMap& map, Rng& rng);

 private:
  int spin_dir_ = 0;  // 0 while driving, +-1 while turning in place
};

// True body-frame delta corrupted per the noise model. A zero model returns
// the input exactly.
OdometryDelta odometry_measurement(const OdometryDelta& true_delta,
                                   const OdometryNoiseModel& model, Rng& rng);

// beam_count rays evenly spaced over fov (full circle when fov >= 2*pi),
// ranged by raycast plus optional Gaussian noise clamped to [0, max_range].
LidarScan simulate_scan(const OccupancyMap& map, const Pose2& pose,
                        int beam_count, double fov, double max_range,
                        double range_noise_sigma, Rng& rng);

}  // namespace gridloc
