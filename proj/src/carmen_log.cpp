#include "gridloc/carmen_log.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridloc {

std::vector<CarmenEvent> read_carmen_log(const std::string& path, double fov,
                                         double max_range) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open carmen log: " + path);
  std::vector<CarmenEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "FLASER") {
      std::size_t n = 0;
      ss >> n;
      if (!ss || n == 0) continue;
      CarmenEvent ev;
      ev.has_scan = true;
      ev.scan.max_range = max_range;
      ev.scan.ranges.resize(n);
      ev.scan.angles.resize(n);
      bool ok = true;
      for (std::size_t b = 0; b < n; ++b) {
        ss >> ev.scan.ranges[b];
        if (!ss) {
          ok = false;
          break;
        }
        if (ev.scan.ranges[b] >= max_range) ev.scan.ranges[b] = max_range;
        ev.scan.angles[b] =
            n > 1 ? -fov / 2.0 + fov * static_cast<double>(b) / (n - 1) : 0.0;
      }
      if (!ok) continue;
      double lx, ly, lt;  // laser pose, unused: we localize the robot frame
      ss >> lx >> ly >> lt;
      ss >> ev.odom.x >> ev.odom.y >> ev.odom.theta;
      ss >> ev.timestamp;
      if (ss) events.push_back(std::move(ev));
    } else if (tag == "ODOM") {
      CarmenEvent ev;
      double tv, rv, accel;
      ss >> ev.odom.x >> ev.odom.y >> ev.odom.theta >> tv >> rv >> accel;
      ss >> ev.timestamp;
      if (ss) events.push_back(std::move(ev));
    }
  }
  return events;
}

std::vector<OdometryDelta> carmen_odometry_deltas(
    const std::vector<CarmenEvent>& events) {
  std::vector<OdometryDelta> deltas;
  deltas.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i == 0) {
      deltas.push_back(OdometryDelta{});
    } else {
      deltas.push_back(relative_delta(events[i - 1].odom, events[i].odom));
    }
  }
  return deltas;
}

}  // namespace gridloc
