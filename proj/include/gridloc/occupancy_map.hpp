#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridloc/geometry.hpp"

namespace gridloc {

enum class MapError {
  kMalformedHeader,
  kZeroDimensions,
  kUnsupportedBitDepth,
  kUnsupportedFormat,
  kTruncatedData,
  kNoFreeSpace,
  kInvalidOrigin,
};

class MapParseError : public std::runtime_error {
 public:
  MapParseError(MapError code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  MapError code() const { return code_; }

 private:
  MapError code_;
};

// Binary traversability grid. Cell (i, j) covers the world rectangle
// [ox + i*res, ox + (i+1)*res) x [oy + j*res, oy + (j+1)*res); +x right,
// +y down in image coordinates. Immutable after construction.
class OccupancyMap {
 public:
  OccupancyMap(int width, int height, double resolution,
               std::vector<uint8_t> occupied, double origin_x = 0.0,
               double origin_y = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }

  bool in_bounds(int i, int j) const {
    return i >= 0 && i < width_ && j >= 0 && j < height_;
  }
  bool occupied(int i, int j) const {
    return occ_[static_cast<std::size_t>(j) * width_ + i] != 0;
  }
  bool free(int i, int j) const { return !occupied(i, j); }
  const std::vector<uint8_t>& cells() const { return occ_; }

  int free_count() const { return free_count_; }

  // World <-> cell conversions; the single source of truth for the grid frame.
  int cell_x(double wx) const {
    return static_cast<int>(std::floor((wx - origin_x_) / resolution_));
  }
  int cell_y(double wy) const {
    return static_cast<int>(std::floor((wy - origin_y_) / resolution_));
  }
  double center_x(int i) const { return origin_x_ + (i + 0.5) * resolution_; }
  double center_y(int j) const { return origin_y_ + (j + 0.5) * resolution_; }

  bool world_free(double wx, double wy) const {
    const int i = cell_x(wx), j = cell_y(wy);
    return in_bounds(i, j) && free(i, j);
  }

 private:
  int width_;
  int height_;
  double resolution_;
  double origin_x_;
  double origin_y_;
  std::vector<uint8_t> occ_;  // 1 = occupied
  int free_count_ = 0;
};

// Per-cell Euclidean distance (meters) to the nearest occupied cell center.
// Exact transform, not a chamfer approximation.
class DistanceField {
 public:
  DistanceField(int width, int height, std::vector<double> values)
      : width_(width), height_(height), values_(std::move(values)) {}

  int width() const { return width_; }
  int height() const { return height_; }
  double at(int i, int j) const {
    return values_[static_cast<std::size_t>(j) * width_ + i];
  }
  const std::vector<double>& values() const { return values_; }

 private:
  int width_;
  int height_;
  std::vector<double> values_;
};

// Decode a grayscale PGM (P2/P5) or 8-bit grayscale PNG. Pixels with gray
// value >= threshold become free, everything else occupied; the boundary
// ring is then forced occupied so rays and motion always terminate.
OccupancyMap load_map(const std::vector<uint8_t>& bytes, int threshold,
                      double resolution, double origin_x = 0.0,
                      double origin_y = 0.0);
OccupancyMap load_map_file(const std::string& path, int threshold,
                           double resolution, double origin_x = 0.0,
                           double origin_y = 0.0);

// Canonical PGM P5 writer: maxval 255, free = 255, occupied = 0.
std::vector<uint8_t> write_pgm(const OccupancyMap& map);
void write_pgm_file(const OccupancyMap& map, const std::string& path);

DistanceField distance_field(const OccupancyMap& map);

// Range (meters) along the ray from (x, y) at `angle` to the point where it
// enters the first occupied cell, clamped to max_range. Grid traversal, so
// the result is deterministic; quantization error is at most a cell diagonal.
// Throws MapParseError(kInvalidOrigin) if the origin cell is occupied.
double raycast(const OccupancyMap& map, double x, double y, double angle,
               double max_range);

}  // namespace gridloc
