#include "gridloc/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridloc {

ParticleSet pf_init(const OccupancyMap& map, const DistanceField& field,
                    const LidarScan& scan0, const LikelihoodParams& lp,
                    const PfParams& params, Rng& rng) {
  if (params.count < 1) throw std::invalid_argument("particle count >= 1");
  Pose2 best_pose;
  double best_l = -1.0;
  const int stride = std::max(1, params.init_stride);
  for (int j = 1; j < map.height() - 1; j += stride) {
    for (int i = 1; i < map.width() - 1; i += stride) {
      if (map.occupied(i, j)) continue;
      Pose2 pose{map.center_x(i), map.center_y(j), 0.0};
      for (int a = 0; a < params.init_theta_bins; ++a) {
        pose.theta = wrap_angle(2.0 * M_PI * a / params.init_theta_bins);
        const double l = scan_likelihood(map, field, pose, scan0, lp);
        if (l > best_l) {
          best_l = l;
          best_pose = pose;
        }
      }
    }
  }
  ParticleSet set;
  set.particles.resize(params.count);
  const double w = 1.0 / params.count;
  set.particles[0] = Particle{best_pose, w};
  for (int p = 1; p < params.count; ++p) {
    Pose2 pose;
    pose.x = best_pose.x + rng.normal() * params.init_sigma_xy;
    pose.y = best_pose.y + rng.normal() * params.init_sigma_xy;
    pose.theta =
        wrap_angle(best_pose.theta + rng.normal() * params.init_sigma_theta);
    set.particles[p] = Particle{pose, w};
  }
  return set;
}

double pf_effective_sample_size(const ParticleSet& set) {
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& p : set.particles) {
    sum += p.weight;
    sum_sq += p.weight * p.weight;
  }
  if (sum_sq <= 0.0) return 0.0;
  return (sum * sum) / sum_sq;
}

void pf_systematic_resample(ParticleSet& set, Rng& rng) {
  const std::size_t n = set.particles.size();
  double total = 0.0;
  for (const auto& p : set.particles) total += p.weight;
  if (total <= 0.0) return;
  std::vector<Particle> out;
  out.reserve(n);
  const double step = total / static_cast<double>(n);
  double pointer = rng.uniform() * step;
  double cum = 0.0;
  std::size_t idx = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const double target = pointer + step * static_cast<double>(p);
    while (idx + 1 < n && cum + set.particles[idx].weight < target) {
      cum += set.particles[idx].weight;
      ++idx;
    }
    out.push_back(set.particles[idx]);
  }
  const double w = 1.0 / static_cast<double>(n);
  for (auto& p : out) p.weight = w;
  set.particles = std::move(out);
}

void pf_step(ParticleSet& set, const OdometryDelta& u, const LidarScan& scan,
             const OccupancyMap& map, const DistanceField& field,
             const OdometryNoiseModel& noise, const LikelihoodParams& lp,
             const PfParams& params, Rng& rng) {
  Pose2 previous = pf_estimate(set);
  double total = 0.0;
  for (auto& p : set.particles) {
    const OdometryDelta sampled = odometry_measurement(u, noise, rng);
    p.pose = compose(p.pose, sampled);
    if (!map.world_free(p.pose.x, p.pose.y)) {
      p.weight = 0.0;  // trajectory intersects the obstacle map
      continue;
    }
    p.weight *= scan_likelihood(map, field, p.pose, scan, lp);
    total += p.weight;
  }
  if (total <= 0.0) {
    // Every hypothesis died (typically all pushed into walls): re-seed
    // around the last estimate with inflated spread, on free space.
    const double w = 1.0 / set.particles.size();
    for (auto& p : set.particles) {
      for (int attempt = 0; attempt < 64; ++attempt) {
        p.pose.x = previous.x + rng.normal() * params.recovery_sigma_xy;
        p.pose.y = previous.y + rng.normal() * params.recovery_sigma_xy;
        if (map.world_free(p.pose.x, p.pose.y)) break;
      }
      p.pose.theta =
          wrap_angle(previous.theta + rng.normal() * params.recovery_sigma_theta);
      p.weight = w;
    }
    return;
  }
  for (auto& p : set.particles) p.weight /= total;
  if (pf_effective_sample_size(set) < set.particles.size() / 2.0) {
    pf_systematic_resample(set, rng);
  }
}

Pose2 pf_estimate(const ParticleSet& set) {
  double total = 0.0, x = 0.0, y = 0.0, c = 0.0, s = 0.0;
  for (const auto& p : set.particles) {
    total += p.weight;
    x += p.weight * p.pose.x;
    y += p.weight * p.pose.y;
    c += p.weight * std::cos(p.pose.theta);
    s += p.weight * std::sin(p.pose.theta);
  }
  if (total <= 0.0) {
    // Degenerate set: fall back to the unweighted mean.
    const double n = static_cast<double>(set.particles.size());
    x = y = c = s = 0.0;
    for (const auto& p : set.particles) {
      x += p.pose.x;
      y += p.pose.y;
      c += std::cos(p.pose.theta);
      s += std::sin(p.pose.theta);
    }
    return Pose2{x / n, y / n, std::atan2(s, c)};
  }
  return Pose2{x / total, y / total, std::atan2(s, c)};
}

}  // namespace gridloc
