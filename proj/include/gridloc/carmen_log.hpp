#pragma once

#include <string>
#include <vector>

#include "gridloc/geometry.hpp"
#include "gridloc/observation.hpp"

namespace gridloc {

// One replayable event from a CARMEN-format log: odometry pose at the event,
// and a laser scan when the source line was FLASER.
struct CarmenEvent {
  double timestamp = 0.0;
  Pose2 odom;
  bool has_scan = false;
  LidarScan scan;
};

// Parses FLASER and ODOM records; everything else is skipped.
//   FLASER n r_1..r_n x y theta odom_x odom_y odom_theta ts host log_ts
//   ODOM x y theta tv rv accel ts host log_ts
// FLASER beams span [-fov/2, fov/2]; ranges >= max_range clamp to the
// sentinel.
std::vector<CarmenEvent> read_carmen_log(const std::string& path,
                                         double fov = M_PI,
                                         double max_range = 10.0);

// Body-frame odometry deltas between consecutive events.
std::vector<OdometryDelta> carmen_odometry_deltas(
    const std::vector<CarmenEvent>& events);

}  // namespace gridloc
