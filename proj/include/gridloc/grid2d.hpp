#pragma once

#include <cstddef>
#include <vector>

namespace gridloc {

// Dense row-major 2D grid of doubles. Cell (i, j) = column i, row j.
struct Grid2d {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Grid2d() = default;
  Grid2d(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int i, int j) { return data[static_cast<std::size_t>(j) * width + i]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(j) * width + i]; }
  std::size_t size() const { return data.size(); }
};

}  // namespace gridloc
