#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gridloc/geometry.hpp"
#include "gridloc/grid2d.hpp"
#include "gridloc/occupancy_map.hpp"
#include "gridloc/thread_pool.hpp"

namespace gridloc {

struct MotionNoise {
  double sigma_x = 0.03;       // body-frame longitudinal std, meters per step
  double sigma_y = 0.03;       // body-frame lateral std, meters per step
  double sigma_theta = 0.012;  // heading std, radians per step
};

class BeliefExtinguishedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense W x H x Theta grid of nonnegative state plausibilities. Channel k
// represents heading k*delta_theta + theta_t; theta_t accumulates odometry
// rotation so the channels never need to be re-binned.
class BeliefTensor {
 public:
  BeliefTensor(int width, int height, int channels, double cell_size,
               double origin_x, double origin_y);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  double cell_size() const { return cell_size_; }
  double delta_theta() const { return delta_theta_; }
  double theta_t() const { return theta_t_; }
  void set_theta_t(double t) { theta_t_ = t; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }

  double channel_angle(int k) const { return k * delta_theta_ + theta_t_; }

  std::size_t plane_size() const {
    return static_cast<std::size_t>(width_) * height_;
  }
  std::size_t size() const { return values_.size(); }

  double* plane(int k) { return values_.data() + plane_size() * k; }
  const double* plane(int k) const { return values_.data() + plane_size() * k; }

  double& at(int i, int j, int k) {
    return values_[plane_size() * k + static_cast<std::size_t>(j) * width_ + i];
  }
  double at(int i, int j, int k) const {
    return values_[plane_size() * k + static_cast<std::size_t>(j) * width_ + i];
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  int width_;
  int height_;
  int channels_;
  double cell_size_;     // meters per cell (delta_W == delta_H)
  double delta_theta_;   // radians per channel, 2*pi / channels
  double theta_t_ = 0.0;
  double origin_x_;
  double origin_y_;
  std::vector<double> values_;  // [k][j][i]
};

// Per-channel spatial kernels plus the shared circular angular kernel, each
// normalized to sum 1 so that convolution preserves mass away from walls.
struct KernelSet {
  int radius = 0;  // spatial half-width; 0 means identity impulse
  std::vector<std::vector<double>> spatial;        // per channel, (2r+1)^2
  std::vector<std::pair<int, double>> angular;     // (channel offset, weight)
  bool degenerate_spatial = false;  // sigma under 0.1 cell collapsed to impulse
  bool degenerate_angular = false;
  // Isotropic noise makes every channel's kernel the same separable
  // Gaussian; the convolution then runs as two 1D passes.
  bool separable = false;
  std::vector<double> sep;  // 1D taps, length 2*radius+1, sum 1
};

// Precomputed G(B0, k): the diffusion pipeline applied to the free-space
// indicator tensor. Dividing by it keeps walls from acting as mass sinks.
struct Activation {
  std::vector<double> values;   // [k][j][i], same layout as the tensor
  std::vector<double> inverse;  // 1 / max(values, 1e-12)
};

struct PoseEstimate {
  Pose2 pose;
  double confidence = 0.0;  // max value / total mass
  int i = 0, j = 0, k = 0;
};

BeliefTensor init_uniform(const OccupancyMap& map, int channels);

// Body-frame displacement rotated into channel k's heading, in cells.
std::pair<double, double> motion_vector(const OdometryDelta& u, int k,
                                        double theta_t, double delta_theta,
                                        double cell_size);

KernelSet build_kernels(const MotionNoise& noise, int channels,
                        double cell_size, double delta_theta);

// Shifts every channel by its motion vector (bilinear, mass outside the grid
// is dropped) and advances theta_t by u.w.
void apply_motion(BeliefTensor& tensor, const OdometryDelta& u);

Activation make_activation(const OccupancyMap& map, const KernelSet& kernels,
                           int channels, ThreadPool& pool);

struct StepScratch {
  std::vector<double> shifted;
  std::vector<double> diffused;
  // per-step phase wall-clock, seconds (filled by step)
  double t_motion = 0.0;
  double t_diffusion = 0.0;
  double t_masking = 0.0;
};

// One belief update: per channel, affine shift -> mask -> 2D convolution ->
// circular angular convolution -> mask -> divide by activation. Occupied
// cells end at exactly zero. Throws BeliefExtinguishedError if the update
// leaves no mass anywhere. Output is identical for any worker count.
void step(BeliefTensor& tensor, const OdometryDelta& u, const OccupancyMap& map,
          const KernelSet& kernels, const Activation& activation,
          ThreadPool& pool, StepScratch& scratch);

// Per-cell maximum across channels.
Grid2d belief_map(const BeliefTensor& tensor);

// Highest-value state; ties resolve to the lowest (k, j, i) index.
PoseEstimate argmax_state(const BeliefTensor& tensor);

// Flat binary snapshot: magic "BLF1", uint32 W/H/Theta, float32 theta_t,
// then W*H*Theta float32 values in [k][j][i] order, all little-endian.
void write_belief_snapshot(const BeliefTensor& tensor, const std::string& path);
BeliefTensor read_belief_snapshot(const std::string& path, double cell_size,
                                  double origin_x, double origin_y);

}  // namespace gridloc
