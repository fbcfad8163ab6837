#include "gridloc/localizer.hpp"

#include <cmath>

namespace gridloc {

Localizer::Localizer(const OccupancyMap& map, const DistanceField& field,
                     const LocalizerConfig& config, ThreadPool& pool)
    : map_(map),
      field_(field),
      config_(config),
      pool_(pool),
      kernels_(build_kernels(config.motion_noise, config.channels,
                             map.resolution(), 2.0 * M_PI / config.channels)),
      activation_(make_activation(map, kernels_, config.channels, pool)),
      rot_kernels_(build_kernels(
          MotionNoise{1e-4, 1e-4, config.motion_noise.sigma_theta},
          config.channels, map.resolution(), 2.0 * M_PI / config.channels)),
      rot_activation_(
          make_activation(map, rot_kernels_, config.channels, pool)),
      tensor_(init_uniform(map, config.channels)),
      trigger_trans_m_(config.trigger_cells * map.resolution()),
      trigger_rot_(M_PI / config.channels) {}

bool Localizer::integrate_odometry(const OdometryDelta& delta) {
  pending_ = compose_delta(pending_, delta);
  if (std::hypot(pending_.u, pending_.v) >= trigger_trans_m_ ||
      std::fabs(pending_.w) >= trigger_rot_) {
    flush();
    return true;
  }
  return false;
}

void Localizer::flush() {
  const bool translated =
      std::hypot(pending_.u, pending_.v) >= 0.5 * trigger_trans_m_;
  if (translated) {
    step(tensor_, pending_, map_, kernels_, activation_, pool_, scratch_);
  } else {
    step(tensor_, pending_, map_, rot_kernels_, rot_activation_, pool_,
         scratch_);
  }
  pending_ = OdometryDelta{};
  ++steps_run_;
}

void Localizer::observe(const LidarScan& scan) {
  if (!config_.use_samples) return;
  constexpr double kEps = 1e-12;
  if (std::fabs(pending_.u) > kEps || std::fabs(pending_.v) > kEps ||
      std::fabs(pending_.w) > kEps) {
    flush();
  }
  const SampleSet samples =
      dither_samples(belief_map(tensor_), config_.sample_budget);
  observation_update(tensor_, samples, scan, map_, field_, config_.likelihood,
                     pool_);
}

PoseEstimate Localizer::estimate() const {
  PoseEstimate est = argmax_state(tensor_);
  est.pose = compose(est.pose, pending_);
  est.pose.theta = wrap_angle(est.pose.theta);
  return est;
}

}  // namespace gridloc
