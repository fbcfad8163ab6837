#include "gridloc/belief_tensor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

namespace gridloc {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

BeliefTensor::BeliefTensor(int width, int height, int channels,
                           double cell_size, double origin_x, double origin_y)
    : width_(width),
      height_(height),
      channels_(channels),
      cell_size_(cell_size),
      delta_theta_(2.0 * M_PI / channels),
      origin_x_(origin_x),
      origin_y_(origin_y),
      values_(static_cast<std::size_t>(width) * height * channels, 0.0) {
  if (width < 1 || height < 1 || channels < 1) {
    throw std::invalid_argument("belief tensor dimensions must be positive");
  }
}

BeliefTensor init_uniform(const OccupancyMap& map, int channels) {
  if (channels < 4 || channels % 2 != 0) {
    throw std::invalid_argument("channel count must be even and >= 4");
  }
  if (map.free_count() == 0) {
    throw std::invalid_argument("map has no free cells to initialize from");
  }
  BeliefTensor t(map.width(), map.height(), channels, map.resolution(),
                 map.origin_x(), map.origin_y());
  const std::size_t plane = t.plane_size();
  for (std::size_t p = 0; p < plane; ++p) {
    const int i = static_cast<int>(p % map.width());
    const int j = static_cast<int>(p / map.width());
    if (map.free(i, j)) {
      for (int k = 0; k < channels; ++k) t.plane(k)[p] = 1.0;
    }
  }
  return t;
}

std::pair<double, double> motion_vector(const OdometryDelta& u, int k,
                                        double theta_t, double delta_theta,
                                        double cell_size) {
  const double angle = k * delta_theta + theta_t;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {(c * u.u - s * u.v) / cell_size, (s * u.u + c * u.v) / cell_size};
}

namespace {

// out(i, j) = in(i - dx, j - dy), bilinear, zero outside the grid.
void shift_plane(const double* in, double* out, int w, int h, double dx,
                 double dy) {
  const double rdx = std::round(dx);
  const double rdy = std::round(dy);
  if (rdx == dx && rdy == dy) {
    // Integer translation: exact, no interpolation smear.
    const long ix = static_cast<long>(rdx);
    const long iy = static_cast<long>(rdy);
    std::memset(out, 0, sizeof(double) * static_cast<std::size_t>(w) * h);
    for (long j = 0; j < h; ++j) {
      const long sj = j - iy;
      if (sj < 0 || sj >= h) continue;
      const long lo = std::max(0L, ix);
      const long hi = std::min(static_cast<long>(w), static_cast<long>(w) + ix);
      if (lo >= hi) continue;
      std::memcpy(out + j * w + lo, in + sj * w + (lo - ix),
                  sizeof(double) * static_cast<std::size_t>(hi - lo));
    }
    return;
  }
  const double fx0 = std::floor(dx);
  const double fy0 = std::floor(dy);
  const long sx = static_cast<long>(fx0);
  const long sy = static_cast<long>(fy0);
  const double ax = dx - fx0;  // in [0,1)
  const double ay = dy - fy0;
  // Source sample for out(i,j) is (i - dx, j - dy); with the fractional split
  // this is a 4-tap blend of cells (i-sx-1..i-sx, j-sy-1..j-sy).
  const double w00 = (1.0 - ax) * (1.0 - ay);
  const double w10 = ax * (1.0 - ay);
  const double w01 = (1.0 - ax) * ay;
  const double w11 = ax * ay;
  for (long j = 0; j < h; ++j) {
    const long s0 = j - sy;      // row for the (1-ay) part
    const long s1 = j - sy - 1;  // row for the ay part
    const bool r0 = s0 >= 0 && s0 < h;
    const bool r1 = s1 >= 0 && s1 < h;
    double* orow = out + j * w;
    const double* row0 = r0 ? in + s0 * w : nullptr;
    const double* row1 = r1 ? in + s1 * w : nullptr;
    for (long i = 0; i < w; ++i) {
      const long c0 = i - sx;
      const long c1 = i - sx - 1;
      const bool k0 = c0 >= 0 && c0 < w;
      const bool k1 = c1 >= 0 && c1 < w;
      double acc = 0.0;
      if (r0) {
        if (k0) acc += w00 * row0[c0];
        if (k1) acc += w10 * row0[c1];
      }
      if (r1) {
        if (k0) acc += w01 * row1[c0];
        if (k1) acc += w11 * row1[c1];
      }
      orow[i] = acc;
    }
  }
}

void convolve_plane(const double* in, double* out, int w, int h,
                    const double* kernel, int r) {
  if (r == 0) {
    std::memcpy(out, in, sizeof(double) * static_cast<std::size_t>(w) * h);
    return;
  }
  const int kw = 2 * r + 1;
  for (int j = 0; j < h; ++j) {
    const bool inner_j = j >= r && j < h - r;
    auto checked = [&](int i) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const int sj = j + dy;
        if (sj < 0 || sj >= h) continue;
        const double* krow = kernel + (dy + r) * kw;
        const double* irow = in + static_cast<std::size_t>(sj) * w;
        for (int dx = -r; dx <= r; ++dx) {
          const int si = i + dx;
          if (si < 0 || si >= w) continue;
          acc += krow[dx + r] * irow[si];
        }
      }
      out[static_cast<std::size_t>(j) * w + i] = acc;
    };
    if (!inner_j) {
      for (int i = 0; i < w; ++i) checked(i);
      continue;
    }
    for (int i = 0; i < std::min(r, w); ++i) checked(i);
    if (r == 2 && w > 4) {
      // Fully unrolled 5x5 body; the hot configuration.
      const double* r0 = in + static_cast<std::size_t>(j - 2) * w;
      const double* r1 = r0 + w;
      const double* r2 = r1 + w;
      const double* r3 = r2 + w;
      const double* r4 = r3 + w;
      const double* k = kernel;
      double* orow = out + static_cast<std::size_t>(j) * w;
      for (int i = 2; i < w - 2; ++i) {
        const int s = i - 2;
        double acc = k[0] * r0[s] + k[1] * r0[s + 1] + k[2] * r0[s + 2] +
                     k[3] * r0[s + 3] + k[4] * r0[s + 4];
        acc += k[5] * r1[s] + k[6] * r1[s + 1] + k[7] * r1[s + 2] +
               k[8] * r1[s + 3] + k[9] * r1[s + 4];
        acc += k[10] * r2[s] + k[11] * r2[s + 1] + k[12] * r2[s + 2] +
               k[13] * r2[s + 3] + k[14] * r2[s + 4];
        acc += k[15] * r3[s] + k[16] * r3[s + 1] + k[17] * r3[s + 2] +
               k[18] * r3[s + 3] + k[19] * r3[s + 4];
        acc += k[20] * r4[s] + k[21] * r4[s + 1] + k[22] * r4[s + 2] +
               k[23] * r4[s + 3] + k[24] * r4[s + 4];
        orow[i] = acc;
      }
    } else {
      for (int i = r; i < w - r; ++i) {
        double acc = 0.0;
        const double* kp = kernel;
        for (int dy = -r; dy <= r; ++dy) {
          const double* irow =
              in + static_cast<std::size_t>(j + dy) * w + (i - r);
          for (int dx = 0; dx < kw; ++dx) acc += kp[dx] * irow[dx];
          kp += kw;
        }
        out[static_cast<std::size_t>(j) * w + i] = acc;
      }
    }
    for (int i = std::max(w - r, r); i < w; ++i) checked(i);
  }
}

// Two-pass separable convolution for isotropic kernels: rows into scratch,
// then columns. Zero padding outside, same as the dense path.
void convolve_plane_separable(const double* in, double* out, double* scratch,
                              int w, int h, const double* taps, int r) {
  const auto row_pass = [&](const double* src, double* dst) {
    for (int j = 0; j < h; ++j) {
      const double* irow = src + static_cast<std::size_t>(j) * w;
      double* orow = dst + static_cast<std::size_t>(j) * w;
      for (int i = 0; i < std::min(r, w); ++i) {
        double acc = 0.0;
        for (int d = -r; d <= r; ++d) {
          const int s = i + d;
          if (s >= 0 && s < w) acc += taps[d + r] * irow[s];
        }
        orow[i] = acc;
      }
      for (int i = r; i < w - r; ++i) {
        double acc = 0.0;
        for (int d = -r; d <= r; ++d) acc += taps[d + r] * irow[i + d];
        orow[i] = acc;
      }
      for (int i = std::max(w - r, r); i < w; ++i) {
        double acc = 0.0;
        for (int d = -r; d <= r; ++d) {
          const int s = i + d;
          if (s >= 0 && s < w) acc += taps[d + r] * irow[s];
        }
        orow[i] = acc;
      }
    }
  };
  row_pass(in, scratch);
  // Column pass, row-major friendly: accumulate whole rows.
  for (int j = 0; j < h; ++j) {
    double* orow = out + static_cast<std::size_t>(j) * w;
    std::memset(orow, 0, sizeof(double) * w);
    for (int d = -r; d <= r; ++d) {
      const int sj = j + d;
      if (sj < 0 || sj >= h) continue;
      const double tap = taps[d + r];
      const double* srow = scratch + static_cast<std::size_t>(sj) * w;
      for (int i = 0; i < w; ++i) orow[i] += tap * srow[i];
    }
  }
}

}  // namespace

KernelSet build_kernels(const MotionNoise& noise, int channels,
                        double cell_size, double delta_theta) {
  if (!(noise.sigma_x > 0.0 && noise.sigma_y > 0.0 && noise.sigma_theta > 0.0)) {
    throw std::invalid_argument("motion noise sigmas must be > 0");
  }
  KernelSet ks;
  const double sx = noise.sigma_x / cell_size;
  const double sy = noise.sigma_y / cell_size;
  const double smax = std::max(sx, sy);

  if (smax < 0.1) {
    // Sub-tenth-cell noise cannot be represented on the grid; collapse to an
    // identity impulse and let the caller warn.
    ks.radius = 0;
    ks.degenerate_spatial = true;
    ks.spatial.assign(channels, {1.0});
  } else if (sx == sy) {
    // Isotropic: rotation drops out of Eq-style kernel weights, so one
    // separable kernel serves every channel.
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * smax)));
    ks.radius = r;
    ks.separable = true;
    ks.sep.resize(2 * r + 1);
    double sum1 = 0.0;
    for (int d = -r; d <= r; ++d) {
      ks.sep[d + r] = std::exp(-0.5 * d * d / (sx * sx));
      sum1 += ks.sep[d + r];
    }
    for (auto& t : ks.sep) t /= sum1;
    const int kw = 2 * r + 1;
    std::vector<double> dense(static_cast<std::size_t>(kw) * kw);
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        dense[static_cast<std::size_t>(dy + r) * kw + (dx + r)] =
            ks.sep[dy + r] * ks.sep[dx + r];
      }
    }
    ks.spatial.assign(channels, dense);
  } else {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * smax)));
    ks.radius = r;
    const int kw = 2 * r + 1;
    ks.spatial.resize(channels);
    for (int k = 0; k < channels; ++k) {
      const double phi = k * delta_theta;
      const double c = std::cos(phi);
      const double s = std::sin(phi);
      std::vector<double> weights(static_cast<std::size_t>(kw) * kw);
      double sum = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          // Offset rotated into the channel's body frame; covariance is
          // diag(sx^2, sy^2) there.
          const double bu = dx * c + dy * s;
          const double bv = -dx * s + dy * c;
          const double e =
              std::exp(-0.5 * (bu * bu / (sx * sx) + bv * bv / (sy * sy)));
          weights[static_cast<std::size_t>(dy + r) * kw + (dx + r)] = e;
          sum += e;
        }
      }
      for (auto& wgt : weights) wgt /= sum;
      ks.spatial[k] = std::move(weights);
    }
  }

  const double sa = noise.sigma_theta / delta_theta;
  if (sa < 0.1) {
    ks.degenerate_angular = true;
    ks.angular = {{0, 1.0}};
  } else {
    const int h = std::max(1, static_cast<int>(std::ceil(3.0 * sa)));
    std::vector<double> folded(channels, 0.0);
    bool fold = 2 * h + 1 >= channels;
    double sum = 0.0;
    if (fold) {
      // Wide kernel wraps the circle; accumulate aliased taps.
      for (int dk = -h; dk <= h; ++dk) {
        const double e = std::exp(-0.5 * dk * dk / (sa * sa));
        folded[((dk % channels) + channels) % channels] += e;
        sum += e;
      }
      for (int off = 0; off < channels; ++off) {
        ks.angular.emplace_back(off, folded[off] / sum);
      }
    } else {
      for (int dk = -h; dk <= h; ++dk) {
        sum += std::exp(-0.5 * dk * dk / (sa * sa));
      }
      for (int dk = -h; dk <= h; ++dk) {
        ks.angular.emplace_back(dk, std::exp(-0.5 * dk * dk / (sa * sa)) / sum);
      }
    }
  }
  return ks;
}

void apply_motion(BeliefTensor& tensor, const OdometryDelta& u) {
  const std::size_t plane = tensor.plane_size();
  std::vector<double> scratch(plane);
  for (int k = 0; k < tensor.channels(); ++k) {
    const auto [dx, dy] = motion_vector(u, k, tensor.theta_t(),
                                        tensor.delta_theta(), tensor.cell_size());
    if (dx == 0.0 && dy == 0.0) continue;
    shift_plane(tensor.plane(k), scratch.data(), tensor.width(),
                tensor.height(), dx, dy);
    std::memcpy(tensor.plane(k), scratch.data(), sizeof(double) * plane);
  }
  tensor.set_theta_t(tensor.theta_t() + u.w);
}

Activation make_activation(const OccupancyMap& map, const KernelSet& kernels,
                           int channels, ThreadPool& pool) {
  const std::size_t plane =
      static_cast<std::size_t>(map.width()) * map.height();
  std::vector<double> base(plane);
  for (std::size_t p = 0; p < plane; ++p) {
    base[p] = map.cells()[p] ? 0.0 : 1.0;
  }
  std::vector<double> diffused(plane * channels);
  std::vector<double> rows(kernels.separable ? plane * channels : 0);
  pool.parallel_for(0, channels, [&](std::size_t k) {
    if (kernels.separable) {
      convolve_plane_separable(base.data(), diffused.data() + plane * k,
                               rows.data() + plane * k, map.width(),
                               map.height(), kernels.sep.data(),
                               kernels.radius);
    } else {
      convolve_plane(base.data(), diffused.data() + plane * k, map.width(),
                     map.height(), kernels.spatial[k].data(), kernels.radius);
    }
  });
  Activation act;
  act.values.resize(plane * channels);
  act.inverse.resize(plane * channels);
  pool.parallel_for(0, channels, [&](std::size_t k) {
    double* out = act.values.data() + plane * k;
    double* inv = act.inverse.data() + plane * k;
    for (std::size_t p = 0; p < plane; ++p) {
      double acc = 0.0;
      for (const auto& [off, wgt] : kernels.angular) {
        const int kk = (static_cast<int>(k) - off % channels + channels) % channels;
        acc += wgt * diffused[plane * kk + p];
      }
      out[p] = acc;
      // Floor avoids 0/0 deep inside walls; those cells are masked to zero
      // afterwards anyway.
      inv[p] = 1.0 / std::max(acc, 1e-12);
    }
  });
  return act;
}

void step(BeliefTensor& tensor, const OdometryDelta& u, const OccupancyMap& map,
          const KernelSet& kernels, const Activation& activation,
          ThreadPool& pool, StepScratch& scratch) {
  const int w = tensor.width();
  const int h = tensor.height();
  const int channels = tensor.channels();
  const std::size_t plane = tensor.plane_size();
  scratch.shifted.resize(plane * channels);
  scratch.diffused.resize(plane * channels);
  const auto& occ = map.cells();

  // Phase 1: per-channel affine shift, then mask by the map.
  double t0 = now_seconds();
  pool.parallel_for(0, channels, [&](std::size_t k) {
    double* out = scratch.shifted.data() + plane * k;
    const auto [dx, dy] = motion_vector(u, static_cast<int>(k), tensor.theta_t(),
                                        tensor.delta_theta(), tensor.cell_size());
    shift_plane(tensor.plane(static_cast<int>(k)), out, w, h, dx, dy);
    for (std::size_t p = 0; p < plane; ++p) {
      if (occ[p]) out[p] = 0.0;
    }
  });
  double t1 = now_seconds();

  // Phase 2: per-channel 2D convolution with the channel's rotated kernel.
  // The separable path runs rows into `diffused` and columns back into
  // `shifted`, which is free after phase 1.
  const std::vector<double>& conv_out =
      kernels.separable ? scratch.shifted : scratch.diffused;
  pool.parallel_for(0, channels, [&](std::size_t k) {
    if (kernels.separable) {
      convolve_plane_separable(scratch.shifted.data() + plane * k,
                               scratch.shifted.data() + plane * k,
                               scratch.diffused.data() + plane * k, w, h,
                               kernels.sep.data(), kernels.radius);
    } else {
      convolve_plane(scratch.shifted.data() + plane * k,
                     scratch.diffused.data() + plane * k, w, h,
                     kernels.spatial[k].data(), kernels.radius);
    }
  });
  double t2 = now_seconds();

  // Phase 3: circular angular convolution, mask, divide by the activation.
  std::vector<double> channel_max(channels, 0.0);
  pool.parallel_for(0, channels, [&](std::size_t k) {
    double* out = tensor.plane(static_cast<int>(k));
    const double* inv = activation.inverse.data() + plane * k;
    // Hoist the circular tap sources; the per-cell loop is then pure MACs.
    const std::size_t n_taps = kernels.angular.size();
    std::vector<const double*> src(n_taps);
    std::vector<double> wgt(n_taps);
    for (std::size_t t = 0; t < n_taps; ++t) {
      const int off = kernels.angular[t].first % channels;
      const int kk = (static_cast<int>(k) - off + channels) % channels;
      src[t] = conv_out.data() + plane * kk;
      wgt[t] = kernels.angular[t].second;
    }
    {
      const double w0 = wgt[0];
      const double* s0 = src[0];
      for (std::size_t p = 0; p < plane; ++p) out[p] = w0 * s0[p];
    }
    for (std::size_t t = 1; t < n_taps; ++t) {
      const double wt = wgt[t];
      const double* st = src[t];
      for (std::size_t p = 0; p < plane; ++p) out[p] += wt * st[p];
    }
    double mx = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      if (occ[p]) {
        out[p] = 0.0;
      } else {
        const double v = out[p] * inv[p];
        out[p] = v;
        mx = std::max(mx, v);
      }
    }
    channel_max[k] = mx;
  });
  double t3 = now_seconds();

  tensor.set_theta_t(tensor.theta_t() + u.w);

  double global_max = 0.0;
  for (double m : channel_max) global_max = std::max(global_max, m);
  if (global_max <= 0.0) {
    throw BeliefExtinguishedError(
        "belief tensor extinguished: no positive mass after step");
  }
  if (global_max < 1e-6) {
    // Uniform rescale; ratios and the argmax are unchanged.
    const double s = 1.0 / global_max;
    pool.parallel_for(0, channels, [&](std::size_t k) {
      double* out = tensor.plane(static_cast<int>(k));
      for (std::size_t p = 0; p < plane; ++p) out[p] *= s;
    });
  }

  scratch.t_motion = t1 - t0;
  scratch.t_diffusion = t2 - t1;
  scratch.t_masking = t3 - t2;
}

Grid2d belief_map(const BeliefTensor& tensor) {
  Grid2d out(tensor.width(), tensor.height(), 0.0);
  const std::size_t plane = tensor.plane_size();
  for (int k = 0; k < tensor.channels(); ++k) {
    const double* pl = tensor.plane(k);
    for (std::size_t p = 0; p < plane; ++p) {
      out.data[p] = std::max(out.data[p], pl[p]);
    }
  }
  return out;
}

PoseEstimate argmax_state(const BeliefTensor& tensor) {
  const std::size_t plane = tensor.plane_size();
  double best = -1.0;
  std::size_t best_p = 0;
  int best_k = 0;
  double total = 0.0;
  for (int k = 0; k < tensor.channels(); ++k) {
    const double* pl = tensor.plane(k);
    for (std::size_t p = 0; p < plane; ++p) {
      total += pl[p];
      if (pl[p] > best) {
        best = pl[p];
        best_p = p;
        best_k = k;
      }
    }
  }
  if (best <= 0.0) {
    throw BeliefExtinguishedError("argmax on an all-zero belief tensor");
  }
  PoseEstimate est;
  est.i = static_cast<int>(best_p % tensor.width());
  est.j = static_cast<int>(best_p / tensor.width());
  est.k = best_k;
  est.pose.x = tensor.origin_x() + (est.i + 0.5) * tensor.cell_size();
  est.pose.y = tensor.origin_y() + (est.j + 0.5) * tensor.cell_size();
  est.pose.theta = wrap_angle(tensor.channel_angle(best_k));
  est.confidence = total > 0.0 ? best / total : 0.0;
  return est;
}

void write_belief_snapshot(const BeliefTensor& tensor, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const char magic[4] = {'B', 'L', 'F', '1'};
  out.write(magic, 4);
  const uint32_t dims[3] = {static_cast<uint32_t>(tensor.width()),
                            static_cast<uint32_t>(tensor.height()),
                            static_cast<uint32_t>(tensor.channels())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  const float theta = static_cast<float>(tensor.theta_t());
  out.write(reinterpret_cast<const char*>(&theta), sizeof(theta));
  std::vector<float> buf(tensor.values().size());
  for (std::size_t p = 0; p < buf.size(); ++p) {
    buf[p] = static_cast<float>(tensor.values()[p]);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

BeliefTensor read_belief_snapshot(const std::string& path, double cell_size,
                                  double origin_x, double origin_y) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "BLF1", 4) != 0) {
    throw std::runtime_error("bad belief snapshot magic in " + path);
  }
  uint32_t dims[3];
  float theta;
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  in.read(reinterpret_cast<char*>(&theta), sizeof(theta));
  if (!in) throw std::runtime_error("truncated belief snapshot " + path);
  BeliefTensor t(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                 static_cast<int>(dims[2]), cell_size, origin_x, origin_y);
  t.set_theta_t(theta);
  std::vector<float> buf(t.values().size());
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in) throw std::runtime_error("truncated belief snapshot " + path);
  for (std::size_t p = 0; p < buf.size(); ++p) {
    t.values()[p] = buf[p];
  }
  return t;
}

}  // namespace gridloc
