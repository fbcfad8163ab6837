#include "gridloc/observation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridloc {

SampleSet dither_samples(const Grid2d& belief_map, int budget) {
  if (budget < 1) throw std::invalid_argument("sample budget must be >= 1");
  const int w = belief_map.width;
  const int h = belief_map.height;
  SampleSet out;
  double total = 0.0;
  for (double v : belief_map.data) total += v;
  out.source_mass = total;
  if (total <= 0.0) return out;

  // Scale so the total mass equals the budget; one emitted sample then
  // corresponds to one unit of mass.
  const double scale = budget / total;
  std::vector<double> work(belief_map.data);
  for (auto& v : work) v *= scale;

  auto diffuse = [&](int i, int j, double err, int dir) {
    // Floyd-Steinberg weights, serpentine-mirrored; shares that would leave
    // the grid are redistributed over the in-grid targets so mass is only
    // lost at the very end of the sweep.
    struct Target {
      int di, dj;
      double w;
    };
    const Target targets[4] = {{dir, 0, 7.0 / 16.0},
                               {-dir, 1, 3.0 / 16.0},
                               {0, 1, 5.0 / 16.0},
                               {dir, 1, 1.0 / 16.0}};
    double wsum = 0.0;
    for (const auto& t : targets) {
      const int ti = i + t.di, tj = j + t.dj;
      if (ti >= 0 && ti < w && tj >= 0 && tj < h) wsum += t.w;
    }
    if (wsum <= 0.0) return;  // bottom corner: residue dropped
    for (const auto& t : targets) {
      const int ti = i + t.di, tj = j + t.dj;
      if (ti >= 0 && ti < w && tj >= 0 && tj < h) {
        work[static_cast<std::size_t>(tj) * w + ti] += err * (t.w / wsum);
      }
    }
  };

  for (int j = 0; j < h; ++j) {
    const int dir = (j % 2 == 0) ? 1 : -1;
    const int start = dir == 1 ? 0 : w - 1;
    for (int i = start; i >= 0 && i < w; i += dir) {
      const std::size_t p = static_cast<std::size_t>(j) * w + i;
      const double v = work[p];
      double q = 0.0;
      // Cells with no prior belief pass their accumulated error through
      // without emitting, so samples stay on the support of the map.
      if (v >= 0.5 && belief_map.data[p] > 0.0) {
        q = 1.0;
        out.cells.emplace_back(i, j);
      }
      diffuse(i, j, v - q, dir);
      work[p] = 0.0;
    }
  }
  return out;
}

double scan_likelihood(const OccupancyMap& map, const DistanceField& field,
                       const Pose2& pose, const LidarScan& scan,
                       const LikelihoodParams& params) {
  if (scan.angles.empty() || scan.angles.size() != scan.ranges.size()) {
    throw std::invalid_argument("scan must have matching, nonempty beams");
  }
  const double floor = params.weight_floor;
  if (!map.world_free(pose.x, pose.y)) {
    return floor;  // minimum attainable value, not an error: candidates may
                   // sit inside walls after a motion update
  }
  const double half_cell = 0.5 * map.resolution();
  const double inv2s2 = 1.0 / (2.0 * params.sigma_hit * params.sigma_hit);
  double log_sum = 0.0;
  int counted = 0;
  const int stride = std::max(1, params.beam_stride);
  for (std::size_t b = 0; b < scan.angles.size();
       b += static_cast<std::size_t>(stride)) {
    const double r = scan.ranges[b];
    if (r >= scan.max_range - 1e-9) continue;  // no-return sentinel
    const double a = pose.theta + scan.angles[b];
    // Push the endpoint half a cell along the beam: ranges measure to the
    // obstacle surface while the distance field is cell-centered.
    const double reach = r + half_cell;
    const double ex = pose.x + reach * std::cos(a);
    const double ey = pose.y + reach * std::sin(a);
    const int ci = map.cell_x(ex);
    const int cj = map.cell_y(ey);
    double gauss = 0.0;
    if (map.in_bounds(ci, cj)) {
      const double d = field.at(ci, cj);
      gauss = std::exp(-d * d * inv2s2);
    }
    log_sum += std::log((1.0 - floor) * gauss + floor);
    ++counted;
  }
  if (counted == 0) return 1.0;  // all beams at max range: no information
  return std::exp(log_sum / counted);
}

void observation_update(BeliefTensor& tensor, const SampleSet& samples,
                        const LidarScan& scan, const OccupancyMap& map,
                        const DistanceField& field,
                        const LikelihoodParams& params, ThreadPool& pool) {
  if (samples.cells.empty()) return;
  const int channels = tensor.channels();
  const std::size_t n = samples.cells.size();

  // Score every (sampled cell, channel) pose. Samples own disjoint cells, so
  // the parallel loop is race-free and order-independent.
  std::vector<double> likelihoods(n * channels);
  std::vector<double> angle_k(channels);
  for (int k = 0; k < channels; ++k) angle_k[k] = tensor.channel_angle(k);
  pool.parallel_for(0, n, [&](std::size_t s) {
    const auto [i, j] = samples.cells[s];
    Pose2 pose;
    pose.x = tensor.origin_x() + (i + 0.5) * tensor.cell_size();
    pose.y = tensor.origin_y() + (j + 0.5) * tensor.cell_size();
    for (int k = 0; k < channels; ++k) {
      pose.theta = angle_k[k];
      likelihoods[s * channels + k] =
          scan_likelihood(map, field, pose, scan, params);
    }
  });

  // Deterministic mean over all sampled states regardless of thread count.
  double mean = 0.0;
  for (double l : likelihoods) mean += l;
  mean /= static_cast<double>(likelihoods.size());

  // Multiplying sampled states by L and everything else by the mean equals,
  // after the max rescale below, multiplying sampled states by L / mean.
  pool.parallel_for(0, n, [&](std::size_t s) {
    const auto [i, j] = samples.cells[s];
    for (int k = 0; k < channels; ++k) {
      tensor.at(i, j, k) *= likelihoods[s * channels + k] / mean;
    }
  });

  const std::size_t plane = tensor.plane_size();
  std::vector<double> channel_max(channels, 0.0);
  pool.parallel_for(0, channels, [&](std::size_t k) {
    const double* pl = tensor.plane(static_cast<int>(k));
    double mx = 0.0;
    for (std::size_t p = 0; p < plane; ++p) mx = std::max(mx, pl[p]);
    channel_max[k] = mx;
  });
  double global_max = 0.0;
  for (double m : channel_max) global_max = std::max(global_max, m);
  if (global_max <= 0.0) {
    throw BeliefExtinguishedError("observation update zeroed the tensor");
  }
  const double s = 1.0 / global_max;
  pool.parallel_for(0, channels, [&](std::size_t k) {
    double* pl = tensor.plane(static_cast<int>(k));
    for (std::size_t p = 0; p < plane; ++p) pl[p] *= s;
  });
}

void write_scan_csv(const std::string& path,
                    const std::vector<std::pair<double, LidarScan>>& scans) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(9);
  for (const auto& [t, scan] : scans) {
    out << t << "," << scan.angles.size() << "," << scan.max_range;
    for (double a : scan.angles) out << "," << a;
    for (double r : scan.ranges) out << "," << r;
    out << "\n";
  }
}

std::vector<std::pair<double, LidarScan>> read_scan_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scan csv: " + path);
  std::vector<std::pair<double, LidarScan>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> fields;
    while (std::getline(ss, tok, ',')) fields.push_back(std::stod(tok));
    if (fields.size() < 3) throw std::runtime_error("short scan csv line");
    const auto n = static_cast<std::size_t>(fields[1]);
    if (fields.size() != 3 + 2 * n) {
      throw std::runtime_error("scan csv line length mismatch");
    }
    LidarScan scan;
    scan.max_range = fields[2];
    scan.angles.assign(fields.begin() + 3, fields.begin() + 3 + n);
    scan.ranges.assign(fields.begin() + 3 + n, fields.end());
    out.emplace_back(fields[0], std::move(scan));
  }
  return out;
}

}  // namespace gridloc
