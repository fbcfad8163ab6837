#include "gridloc/render.hpp"

#include <algorithm>
#include <cmath>

#include "gridloc/image_png.hpp"

namespace gridloc {

namespace {

// Compact viridis approximation: anchor colors interpolated linearly.
void viridis(double t, uint8_t* rgb) {
  static const double anchors[6][3] = {
      {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
      {0.164, 0.471, 0.558}, {0.478, 0.821, 0.318}, {0.993, 0.906, 0.144}};
  t = std::clamp(t, 0.0, 1.0);
  const double f = t * 5.0;
  const int a = std::min(4, static_cast<int>(f));
  const double u = f - a;
  for (int c = 0; c < 3; ++c) {
    const double v = anchors[a][c] * (1.0 - u) + anchors[a + 1][c] * u;
    rgb[c] = static_cast<uint8_t>(std::lround(255.0 * v));
  }
}

void put_pixel(std::vector<uint8_t>& rgb, int w, int h, int i, int j,
               uint8_t r, uint8_t g, uint8_t b) {
  if (i < 0 || i >= w || j < 0 || j >= h) return;
  const std::size_t p = (static_cast<std::size_t>(j) * w + i) * 3;
  rgb[p] = r;
  rgb[p + 1] = g;
  rgb[p + 2] = b;
}

void draw_line(std::vector<uint8_t>& rgb, int w, int h, int x0, int y0, int x1,
               int y1, uint8_t r, uint8_t g, uint8_t b) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    put_pixel(rgb, w, h, x0, y0, r, g, b);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

void render_belief_png(const std::string& path, const Grid2d& belief,
                       const OccupancyMap& map) {
  const int w = belief.width, h = belief.height;
  double peak = 0.0;
  for (double v : belief.data) peak = std::max(peak, v);
  std::vector<uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      uint8_t px[3];
      if (map.occupied(i, j)) {
        px[0] = px[1] = px[2] = 40;
      } else {
        viridis(peak > 0.0 ? belief.at(i, j) / peak : 0.0, px);
      }
      put_pixel(rgb, w, h, i, j, px[0], px[1], px[2]);
    }
  }
  write_png_rgb8(path, w, h, rgb);
}

void render_trajectory_png(const std::string& path, const OccupancyMap& map,
                           const std::vector<RecordRow>& rows) {
  const int w = map.width(), h = map.height();
  std::vector<uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const uint8_t v = map.occupied(i, j) ? 40 : 235;
      put_pixel(rgb, w, h, i, j, v, v, v);
    }
  }
  auto to_cell = [&](const Pose2& p, int& i, int& j) {
    i = map.cell_x(p.x);
    j = map.cell_y(p.y);
  };
  for (std::size_t r = 1; r < rows.size(); ++r) {
    int x0, y0, x1, y1;
    to_cell(rows[r - 1].estimate, x0, y0);
    to_cell(rows[r].estimate, x1, y1);
    draw_line(rgb, w, h, x0, y0, x1, y1, 210, 40, 40);
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    int x0, y0, x1, y1;
    to_cell(rows[r - 1].truth, x0, y0);
    to_cell(rows[r].truth, x1, y1);
    draw_line(rgb, w, h, x0, y0, x1, y1, 40, 60, 210);
  }
  write_png_rgb8(path, w, h, rgb);
}

}  // namespace gridloc
