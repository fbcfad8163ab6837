#pragma once

#include <memory>

#include "gridloc/belief_tensor.hpp"
#include "gridloc/geometry.hpp"
#include "gridloc/observation.hpp"
#include "gridloc/occupancy_map.hpp"
#include "gridloc/thread_pool.hpp"

namespace gridloc {

struct LocalizerConfig {
  int channels = 128;
  MotionNoise motion_noise;
  LikelihoodParams likelihood;
  int sample_budget = 512;
  bool use_samples = true;
  // Belief updates run once the accumulated translation reaches one cell or
  // the accumulated rotation reaches half a channel, whichever comes first.
  double trigger_cells = 1.0;
};

// Dense-belief localization loop: accumulates body-frame odometry, runs the
// tensor update when the motion trigger fires, and applies sampled LIDAR
// updates on demand. Pose queries compose the pending (sub-trigger) motion
// onto the argmax state so estimates never lag the odometry.
class Localizer {
 public:
  Localizer(const OccupancyMap& map, const DistanceField& field,
            const LocalizerConfig& config, ThreadPool& pool);

  // Feed one body-frame odometry increment. Returns true if a belief-tensor
  // step ran.
  bool integrate_odometry(const OdometryDelta& delta);

  // Sampled observation update (Eq-style multiplicative reweighting). Any
  // pending sub-trigger motion is flushed first so samples come from the
  // current belief map. No-op when sampling is disabled in the config.
  void observe(const LidarScan& scan);

  PoseEstimate estimate() const;
  const BeliefTensor& belief() const { return tensor_; }
  BeliefTensor& belief() { return tensor_; }
  const KernelSet& kernels() const { return kernels_; }
  const Activation& activation() const { return activation_; }
  const OdometryDelta& pending() const { return pending_; }
  int steps_run() const { return steps_run_; }

  // Flush pending motion through a tensor step regardless of the trigger.
  void flush();

 private:
  const OccupancyMap& map_;
  const DistanceField& field_;
  LocalizerConfig config_;
  ThreadPool& pool_;
  KernelSet kernels_;
  Activation activation_;
  // Rotation-dominated flushes diffuse orientation only: spinning in place
  // adds heading noise, not position noise, and the full spatial kernel at
  // every half-channel of spin would wash the position belief out.
  KernelSet rot_kernels_;
  Activation rot_activation_;
  BeliefTensor tensor_;
  StepScratch scratch_;
  OdometryDelta pending_{};
  double trigger_trans_m_;
  double trigger_rot_;
  int steps_run_ = 0;
};

}  // namespace gridloc
