#pragma once

#include <vector>

#include "gridloc/geometry.hpp"
#include "gridloc/observation.hpp"
#include "gridloc/occupancy_map.hpp"
#include "gridloc/rng.hpp"
#include "gridloc/simulator.hpp"

namespace gridloc {

struct Particle {
  Pose2 pose;
  double weight = 0.0;
};

struct ParticleSet {
  std::vector<Particle> particles;
};

struct PfParams {
  int count = 75;
  int init_theta_bins = 32;   // angles scored per cell when initializing
  int init_stride = 1;        // cell stride for the init scoring sweep
  double init_sigma_xy = 0.15;     // spread of the initial particle cloud, m
  double init_sigma_theta = 0.1;   // rad
  double recovery_sigma_xy = 0.5;  // spread after an all-zero-weight step, m
  double recovery_sigma_theta = 0.5;
};

// Scores the first scan over a coarse pose grid and seeds the cloud around
// the best pose: particle 0 sits exactly at the argmax, the rest are
// Gaussian perturbations of it.
ParticleSet pf_init(const OccupancyMap& map, const DistanceField& field,
                    const LidarScan& scan0, const LikelihoodParams& lp,
                    const PfParams& params, Rng& rng);

// Standard predict-weight-resample step: per-particle noisy propagation,
// likelihood weighting (particles in occupied cells get weight zero),
// systematic resampling when the effective sample size drops below half the
// count. All weights zero triggers re-seeding around the previous estimate
// with inflated noise.
void pf_step(ParticleSet& set, const OdometryDelta& u, const LidarScan& scan,
             const OccupancyMap& map, const DistanceField& field,
             const OdometryNoiseModel& noise, const LikelihoodParams& lp,
             const PfParams& params, Rng& rng);

// Weighted mean position with circular mean orientation.
Pose2 pf_estimate(const ParticleSet& set);

double pf_effective_sample_size(const ParticleSet& set);
void pf_systematic_resample(ParticleSet& set, Rng& rng);

}  // namespace gridloc
