#include "gridloc/occupancy_map.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "gridloc/image_png.hpp"

namespace gridloc {

OccupancyMap::OccupancyMap(int width, int height, double resolution,
                           std::vector<uint8_t> occupied, double origin_x,
                           double origin_y)
    : width_(width),
      height_(height),
      resolution_(resolution),
      origin_x_(origin_x),
      origin_y_(origin_y),
      occ_(std::move(occupied)) {
  if (width_ < 1 || height_ < 1) {
    throw MapParseError(MapError::kZeroDimensions, "map with zero dimension");
  }
  if (!(resolution_ > 0.0)) {
    throw std::invalid_argument("map resolution must be > 0");
  }
  if (occ_.size() != static_cast<std::size_t>(width_) * height_) {
    throw std::invalid_argument("occupancy buffer size mismatch");
  }
  // Force the boundary ring occupied so no ray or motion escapes the grid.
  for (int i = 0; i < width_; ++i) {
    occ_[i] = 1;
    occ_[static_cast<std::size_t>(height_ - 1) * width_ + i] = 1;
  }
  for (int j = 0; j < height_; ++j) {
    occ_[static_cast<std::size_t>(j) * width_] = 1;
    occ_[static_cast<std::size_t>(j) * width_ + width_ - 1] = 1;
  }
  for (uint8_t c : occ_) free_count_ += (c == 0);
}

namespace {

struct PgmParser {
  const std::vector<uint8_t>& bytes;
  std::size_t pos = 0;

  explicit PgmParser(const std::vector<uint8_t>& b) : bytes(b) {}

  // Skips whitespace and '#' comments between header tokens.
  void skip_space() {
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  }

  long next_int() {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw MapParseError(MapError::kMalformedHeader,
                          "expected integer in PGM header");
    }
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > std::numeric_limits<int>::max()) {
        throw MapParseError(MapError::kMalformedHeader, "PGM value overflow");
      }
      ++pos;
    }
    return v;
  }
};

GrayImage decode_pgm(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' ||
      (bytes[1] != '2' && bytes[1] != '5')) {
    throw MapParseError(MapError::kMalformedHeader,
                        "not a P2/P5 PGM (bad magic)");
  }
  const bool binary = bytes[1] == '5';
  PgmParser p(bytes);
  p.pos = 2;
  const long w = p.next_int();
  const long h = p.next_int();
  const long maxval = p.next_int();
  if (w == 0 || h == 0) {
    throw MapParseError(MapError::kZeroDimensions, "PGM with zero dimension");
  }
  if (maxval <= 0 || maxval > 255) {
    throw MapParseError(MapError::kUnsupportedBitDepth,
                        "PGM maxval " + std::to_string(maxval) +
                            " unsupported; need 1..255");
  }

  GrayImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  img.pixels.resize(n);

  if (binary) {
    // Exactly one whitespace byte separates the header from raster data.
    if (p.pos >= bytes.size() ||
        !std::isspace(static_cast<unsigned char>(bytes[p.pos]))) {
      throw MapParseError(MapError::kMalformedHeader,
                          "missing separator before P5 raster");
    }
    ++p.pos;
    if (bytes.size() - p.pos < n) {
      throw MapParseError(MapError::kTruncatedData, "P5 raster truncated");
    }
    std::memcpy(img.pixels.data(), bytes.data() + p.pos, n);
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      long v;
      try {
        v = p.next_int();
      } catch (const MapParseError&) {
        throw MapParseError(MapError::kTruncatedData, "P2 raster truncated");
      }
      if (v > maxval) {
        throw MapParseError(MapError::kTruncatedData,
                            "P2 sample exceeds maxval");
      }
      img.pixels[k] = static_cast<uint8_t>(v);
    }
  }
  if (maxval != 255) {
    for (auto& px : img.pixels) {
      px = static_cast<uint8_t>(px * 255L / maxval);
    }
  }
  return img;
}

}  // namespace

OccupancyMap load_map(const std::vector<uint8_t>& bytes, int threshold,
                      double resolution, double origin_x, double origin_y) {
  if (threshold <= 0 || threshold >= 255) {
    throw std::invalid_argument("threshold must be in (0, 255)");
  }
  GrayImage img;
  if (looks_like_png(bytes)) {
    img = decode_png_gray8(bytes);
  } else {
    img = decode_pgm(bytes);
  }
  std::vector<uint8_t> occ(img.pixels.size());
  for (std::size_t k = 0; k < img.pixels.size(); ++k) {
    occ[k] = img.pixels[k] >= threshold ? 0 : 1;
  }
  return OccupancyMap(img.width, img.height, resolution, std::move(occ),
                      origin_x, origin_y);
}

OccupancyMap load_map_file(const std::string& path, int threshold,
                           double resolution, double origin_x,
                           double origin_y) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return load_map(bytes, threshold, resolution, origin_x, origin_y);
}

std::vector<uint8_t> write_pgm(const OccupancyMap& map) {
  std::string header = "P5\n" + std::to_string(map.width()) + " " +
                       std::to_string(map.height()) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + map.cells().size());
  for (uint8_t c : map.cells()) out.push_back(c ? 0 : 255);
  return out;
}

void write_pgm_file(const OccupancyMap& map, const std::string& path) {
  const auto bytes = write_pgm(map);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

namespace {

// 1D squared distance transform (Felzenszwalb & Huttenlocher): lower envelope
// of parabolas rooted at (i, f[i]).
void edt_1d(const std::vector<double>& f, std::vector<double>& d,
            std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const int p = v[k];
    d[q] = (q - p) * (q - p) + f[p];
  }
}

}  // namespace

DistanceField distance_field(const OccupancyMap& map) {
  const int w = map.width(), h = map.height();
  std::vector<double> sq(static_cast<std::size_t>(w) * h);

  // Column pass: per-column 1D distance to the nearest occupied row by two
  // linear sweeps (the parabola pass cannot take infinite inputs), squared.
  // Row pass: Felzenszwalb-Huttenlocher on the finite squared columns.
  {
    const int far = w + h;
    for (int i = 0; i < w; ++i) {
      int run = far;
      for (int j = 0; j < h; ++j) {
        run = map.occupied(i, j) ? 0 : (run >= far ? far : run + 1);
        sq[static_cast<std::size_t>(j) * w + i] = run;
      }
      run = far;
      for (int j = h - 1; j >= 0; --j) {
        run = map.occupied(i, j) ? 0 : (run >= far ? far : run + 1);
        auto& cell = sq[static_cast<std::size_t>(j) * w + i];
        cell = std::min(cell, static_cast<double>(run));
        cell *= cell;
      }
    }
  }
  {
    std::vector<double> f(w), d(w), z(w + 1);
    std::vector<int> v(w);
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) f[i] = sq[static_cast<std::size_t>(j) * w + i];
      edt_1d(f, d, v, z);
      for (int i = 0; i < w; ++i) {
        sq[static_cast<std::size_t>(j) * w + i] = d[i];
      }
    }
  }
  std::vector<double> values(sq.size());
  for (std::size_t k = 0; k < sq.size(); ++k) {
    values[k] = std::sqrt(sq[k]) * map.resolution();
  }
  return DistanceField(w, h, std::move(values));
}

double raycast(const OccupancyMap& map, double x, double y, double angle,
               double max_range) {
  if (!(max_range > 0.0)) throw std::invalid_argument("max_range must be > 0");
  const double res = map.resolution();
  // Work in cell units relative to the map origin.
  double cx = (x - map.origin_x()) / res;
  double cy = (y - map.origin_y()) / res;
  int i = static_cast<int>(std::floor(cx));
  int j = static_cast<int>(std::floor(cy));
  if (!map.in_bounds(i, j) || map.occupied(i, j)) {
    throw MapParseError(MapError::kInvalidOrigin,
                        "raycast origin not in a free cell");
  }
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  const double max_cells = max_range / res;

  const int step_x = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const int step_y = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  const double t_delta_x = step_x != 0 ? std::fabs(1.0 / dx) : inf;
  const double t_delta_y = step_y != 0 ? std::fabs(1.0 / dy) : inf;
  double t_max_x =
      step_x != 0
          ? ((step_x > 0 ? (i + 1.0 - cx) : (cx - i)) * t_delta_x)
          : inf;
  double t_max_y =
      step_y != 0
          ? ((step_y > 0 ? (j + 1.0 - cy) : (cy - j)) * t_delta_y)
          : inf;

  // Amanatides-Woo traversal. A tie (ray through a cell corner) advances
  // both axes at once: the ray only grazes the side cells, it enters the
  // diagonal one. The tolerance absorbs the ulp-level asymmetry of cos/sin
  // at diagonal angles so 45-degree beams behave like exact diagonals.
  constexpr double kTieEps = 1e-9;
  double t = 0.0;
  while (t <= max_cells) {
    if (t_max_x < t_max_y - kTieEps) {
      t = t_max_x;
      t_max_x += t_delta_x;
      i += step_x;
    } else if (t_max_y < t_max_x - kTieEps) {
      t = t_max_y;
      t_max_y += t_delta_y;
      j += step_y;
    } else {
      t = t_max_x;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
      i += step_x;
      j += step_y;
    }
    if (!map.in_bounds(i, j)) break;  // boundary ring makes this unreachable
    if (map.occupied(i, j)) {
      return std::min(t, max_cells) * res;
    }
  }
  return max_range;
}

}  // namespace gridloc
