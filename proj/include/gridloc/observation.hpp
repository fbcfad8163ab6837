#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gridloc/belief_tensor.hpp"
#include "gridloc/geometry.hpp"
#include "gridloc/grid2d.hpp"
#include "gridloc/occupancy_map.hpp"
#include "gridloc/thread_pool.hpp"

namespace gridloc {

struct LidarScan {
  std::vector<double> angles;  // sensor frame, ascending
  std::vector<double> ranges;  // meters; range == max_range means no return
  double max_range = 0.0;
};

struct LikelihoodParams {
  double sigma_hit = 0.2;     // endpoint Gaussian std, meters
  double weight_floor = 0.05; // uniform mixture floor per beam
  int beam_stride = 4;        // score every stride-th beam
};

struct SampleSet {
  std::vector<std::pair<int, int>> cells;  // (i, j), emission order
  double source_mass = 0.0;                // total belief-map mass when drawn
};

// Floyd-Steinberg error diffusion over the belief map, serpentine order,
// threshold 0.5. Sample density tracks local belief; the count lands within
// one of the budget (cells that held zero belief never emit).
SampleSet dither_samples(const Grid2d& belief_map, int budget);

// Likelihood-field scan model. Every stride-th beam's endpoint is scored by
// exp(-d^2 / (2 sigma_hit^2)) against the obstacle distance field, mixed
// with the floor, and the beam scores combine as a geometric mean so the
// value does not depend on beam count. Max-range returns carry no endpoint
// and are skipped. A pose inside an obstacle scores the global minimum.
double scan_likelihood(const OccupancyMap& map, const DistanceField& field,
                       const Pose2& pose, const LidarScan& scan,
                       const LikelihoodParams& params);

// Sampled observation update: sampled cells are reweighted by their scan
// likelihood across all channels, unsampled cells by the mean sampled
// likelihood, then the tensor is rescaled to a global max of 1. Cells with
// positive prior keep positive posterior.
void observation_update(BeliefTensor& tensor, const SampleSet& samples,
                        const LidarScan& scan, const OccupancyMap& map,
                        const DistanceField& field,
                        const LikelihoodParams& params, ThreadPool& pool);

// CSV line per scan: t, beam_count, max_range, angles..., ranges...
void write_scan_csv(const std::string& path,
                    const std::vector<std::pair<double, LidarScan>>& scans);
std::vector<std::pair<double, LidarScan>> read_scan_csv(const std::string& path);

}  // namespace gridloc
