#pragma once

#include <cmath>

namespace gridloc {

// Wrap an angle into [-pi, pi).
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a < -M_PI) a += 2.0 * M_PI;
  if (a >= M_PI) a -= 2.0 * M_PI;
  return a;
}

// Smallest absolute angular difference, in [0, pi].
inline double angle_diff(double a, double b) {
  return std::fabs(wrap_angle(a - b));
}

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

// Body-frame motion between two filter steps: forward u, left v, heading change w.
struct OdometryDelta {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
};

// a then b, b expressed in a's frame.
inline Pose2 compose(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return Pose2{a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y,
               wrap_angle(a.theta + b.theta)};
}

inline Pose2 compose(const Pose2& a, const OdometryDelta& d) {
  return compose(a, Pose2{d.u, d.v, d.w});
}

// Body-frame delta of b relative to a (a ⊕ result == b).
inline OdometryDelta relative_delta(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return OdometryDelta{c * dx + s * dy, -s * dx + c * dy,
                       wrap_angle(b.theta - a.theta)};
}

// Accumulate a second delta onto a pending one (both body-frame).
inline OdometryDelta compose_delta(const OdometryDelta& a, const OdometryDelta& b) {
  const double c = std::cos(a.w);
  const double s = std::sin(a.w);
  return OdometryDelta{a.u + c * b.u - s * b.v, a.v + s * b.u + c * b.v, a.w + b.w};
}

inline double distance(const Pose2& a, const Pose2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace gridloc
