#include "gridloc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridloc {

RobotState step_robot(const RobotState& state, const Command& cmd, double dt,
                      const OccupancyMap& map) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  const double theta = state.pose.theta;
  const double w = cmd.turn;
  double nx, ny;
  if (std::fabs(w) < 1e-12) {
    nx = state.pose.x + cmd.speed * std::cos(theta) * dt;
    ny = state.pose.y + cmd.speed * std::sin(theta) * dt;
  } else {
    // Closed-form arc keeps circles closed to floating-point accuracy.
    const double radius = cmd.speed / w;
    nx = state.pose.x + radius * (std::sin(theta + w * dt) - std::sin(theta));
    ny = state.pose.y - radius * (std::cos(theta + w * dt) - std::cos(theta));
  }
  RobotState out = state;
  out.time += dt;
  out.pose.theta = wrap_angle(theta + w * dt);
  if (map.world_free(nx, ny)) {
    out.distance_traveled +=
        std::hypot(nx - state.pose.x, ny - state.pose.y);
    out.pose.x = nx;
    out.pose.y = ny;
  }
  // else: translation cancelled, rotation kept
  return out;
}

Command RandomWalkPolicy::next(const RobotState& state, const OccupancyMap& map,
                               Rng& rng) {
  const double ahead = raycast(map, state.pose.x, state.pose.y,
                               state.pose.theta, clear_distance + 0.5);
  if (ahead < clear_distance) {
    if (spin_dir_ == 0) {
      spin_dir_ = rng.uniform() < 0.5 ? -1 : 1;
    }
    return Command{0.0, spin_dir_ * spin_rate};
  }
  spin_dir_ = 0;
  return Command{nominal_speed, rng.normal(0.0, jitter_rate)};
}

OdometryDelta odometry_measurement(const OdometryDelta& true_delta,
                                   const OdometryNoiseModel& model, Rng& rng) {
  const double dist = std::hypot(true_delta.u, true_delta.v);
  const double rot = std::fabs(true_delta.w);
  OdometryDelta out;
  out.u = true_delta.u + rng.normal() * (model.alpha_trans * dist);
  out.v = true_delta.v + rng.normal() * (model.alpha_trans * dist);
  out.w = true_delta.w + rng.normal() * (model.alpha_rot * rot) +
          rng.normal() * (model.alpha_cross * dist);
  return out;
}

LidarScan simulate_scan(const OccupancyMap& map, const Pose2& pose,
                        int beam_count, double fov, double max_range,
                        double range_noise_sigma, Rng& rng) {
  if (beam_count < 1) throw std::invalid_argument("beam_count must be >= 1");
  if (!map.world_free(pose.x, pose.y)) {
    throw MapParseError(MapError::kInvalidOrigin,
                        "scan pose is not in free space");
  }
  LidarScan scan;
  scan.max_range = max_range;
  scan.angles.resize(beam_count);
  scan.ranges.resize(beam_count);
  const bool full_circle = fov >= 2.0 * M_PI - 1e-9;
  for (int b = 0; b < beam_count; ++b) {
    double a;
    if (beam_count == 1) {
      a = 0.0;
    } else if (full_circle) {
      a = -M_PI + b * (2.0 * M_PI / beam_count);  // endpoint-exclusive
    } else {
      a = -fov / 2.0 + b * (fov / (beam_count - 1));
    }
    scan.angles[b] = a;
    double r = raycast(map, pose.x, pose.y, pose.theta + a, max_range);
    if (range_noise_sigma > 0.0) {
      r += rng.normal() * range_noise_sigma;
      r = std::clamp(r, 0.0, max_range);
    }
    scan.ranges[b] = r;
  }
  return scan;
}

}  // namespace gridloc
