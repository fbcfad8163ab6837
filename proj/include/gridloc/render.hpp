#pragma once

#include <string>
#include <vector>

#include "gridloc/evaluation.hpp"
#include "gridloc/grid2d.hpp"
#include "gridloc/occupancy_map.hpp"

namespace gridloc {

// Belief-map heatmap with a fixed perceptual colormap, scaled to the frame's
// own maximum so relative brightness is what matters.
void render_belief_png(const std::string& path, const Grid2d& belief,
                       const OccupancyMap& map);

// Map background with the ground-truth trajectory in blue and the estimated
// one in red.
void render_trajectory_png(const std::string& path, const OccupancyMap& map,
                           const std::vector<RecordRow>& rows);

}  // namespace gridloc
