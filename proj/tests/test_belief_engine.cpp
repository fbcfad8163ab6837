#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include "gridloc/belief_tensor.hpp"
#include "gridloc/occupancy_map.hpp"
#include "gridloc/rng.hpp"
#include "gridloc/worlds.hpp"
#include "oracle_bayes.hpp"

using namespace gridloc;

namespace {

OccupancyMap two_free_cells_map() {
  // 4x4 with exactly the cells (1,1) and (2,2) free.
  std::vector<uint8_t> occ(16, 1);
  occ[1 * 4 + 1] = 0;
  occ[2 * 4 + 2] = 0;
  return OccupancyMap(4, 4, 0.5, std::move(occ));
}

OccupancyMap random_map(int w, int h, double occupied_fraction, uint64_t seed) {
  Rng rng(seed);
  std::vector<uint8_t> occ(static_cast<std::size_t>(w) * h, 0);
  for (auto& c : occ) c = rng.uniform() < occupied_fraction ? 1 : 0;
  OccupancyMap map(w, h, 0.1, std::move(occ));
  if (map.free_count() == 0) throw std::runtime_error("unlucky seed");
  return map;
}

double total_mass(const BeliefTensor& t) {
  return std::accumulate(t.values().begin(), t.values().end(), 0.0);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    m = std::max(m, std::fabs(a[p] - b[p]));
  }
  return m;
}

}  // namespace

TEST_CASE("init_uniform: two free cells at 8 channels gives 16 unit entries") {
  const auto map = two_free_cells_map();
  const auto t = init_uniform(map, 8);
  int nonzero = 0;
  for (double v : t.values()) {
    if (v != 0.0) {
      CHECK(v == 1.0);
      ++nonzero;
    }
  }
  CHECK(nonzero == 16);
  CHECK(t.theta_t() == 0.0);
}

TEST_CASE("init_uniform: nonzero count is free cells times channels") {
  const auto map = make_asymmetric_office_map();
  const auto t = init_uniform(map, 16);
  std::size_t nonzero = 0;
  for (double v : t.values()) nonzero += v != 0.0;
  CHECK(nonzero == static_cast<std::size_t>(map.free_count()) * 16);
}

TEST_CASE("init_uniform: rejects bad channel counts and all-occupied maps") {
  const auto map = two_free_cells_map();
  CHECK_THROWS_AS(init_uniform(map, 2), std::invalid_argument);
  CHECK_THROWS_AS(init_uniform(map, 7), std::invalid_argument);
  const OccupancyMap solid(4, 4, 0.5, std::vector<uint8_t>(16, 1));
  CHECK_THROWS_AS(init_uniform(solid, 8), std::invalid_argument);
}

TEST_CASE("motion_vector: identity channel passes the body frame through") {
  const auto [dx, dy] = motion_vector({1.0, 0.0, 0.0}, 0, 0.0, M_PI / 4, 1.0);
  CHECK(dx == 1.0);
  CHECK(dy == 0.0);
}

TEST_CASE("motion_vector: quarter turn maps forward onto +y") {
  // channel angle pi/2 with 4 channels at k=1
  const auto [dx, dy] = motion_vector({1.0, 0.0, 0.0}, 1, 0.0, M_PI / 2, 1.0);
  CHECK(dx == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dy == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("motion_vector: pi/6 rotation of a 2 m forward move") {
  const auto [dx, dy] = motion_vector({2.0, 0.0, 0.0}, 1, 0.0, M_PI / 6, 1.0);
  CHECK(dx == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(dy == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("motion_vector: meters convert to cells by the resolution") {
  const auto [dx, dy] = motion_vector({0.3, -0.1, 0.0}, 0, 0.0, M_PI, 0.1);
  CHECK(dx == doctest::Approx(3.0));
  CHECK(dy == doctest::Approx(-1.0));
}

TEST_CASE("apply_motion: zero delta is the identity") {
  const auto map = random_map(12, 12, 0.2, 21);
  auto t = init_uniform(map, 8);
  const auto before = t.values();
  apply_motion(t, {0.0, 0.0, 0.0});
  CHECK(t.values() == before);
  CHECK(t.theta_t() == 0.0);
}

TEST_CASE("apply_motion: integer shift moves an impulse without smear") {
  BeliefTensor t(16, 16, 4, 1.0, 0.0, 0.0);
  t.at(5, 7, 0) = 2.0;
  apply_motion(t, {3.0, 0.0, 0.0});  // 3 cells forward on channel 0
  CHECK(t.at(8, 7, 0) == 2.0);
  CHECK(t.at(5, 7, 0) == 0.0);
  std::size_t nonzero = 0;
  for (double v : t.values()) nonzero += v != 0.0;
  // the other channels hold no mass, so exactly one entry remains
  CHECK(nonzero == 1);
}

TEST_CASE("apply_motion: half-cell shift splits mass evenly") {
  BeliefTensor t(16, 16, 4, 1.0, 0.0, 0.0);
  t.at(5, 7, 0) = 1.0;
  apply_motion(t, {0.5, 0.0, 0.0});
  CHECK(t.at(5, 7, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t.at(6, 7, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("apply_motion: rotation accumulates into theta_t") {
  BeliefTensor t(8, 8, 4, 1.0, 0.0, 0.0);
  apply_motion(t, {0.0, 0.0, 0.2});
  apply_motion(t, {0.0, 0.0, -0.05});
  CHECK(t.theta_t() == doctest::Approx(0.15).epsilon(1e-15));
}

TEST_CASE("build_kernels: isotropic noise gives identical kernels per channel") {
  const auto ks = build_kernels({0.08, 0.08, 0.05}, 8, 0.1, 2.0 * M_PI / 8);
  REQUIRE(ks.spatial.size() == 8);
  for (int k = 1; k < 8; ++k) {
    for (std::size_t p = 0; p < ks.spatial[0].size(); ++p) {
      CHECK(ks.spatial[k][p] == doctest::Approx(ks.spatial[0][p]).epsilon(1e-12));
    }
  }
}

TEST_CASE("build_kernels: center weight is the maximum for every channel") {
  const auto ks = build_kernels({0.12, 0.04, 0.05}, 16, 0.1, 2.0 * M_PI / 16);
  const int kw = 2 * ks.radius + 1;
  for (const auto& kern : ks.spatial) {
    const double center = kern[(ks.radius) * kw + ks.radius];
    for (double w : kern) CHECK(center >= w);
  }
}

TEST_CASE("build_kernels: quarter-turn channel transposes the kernel") {
  // sigma_x = 2 cells, sigma_y = 0.5 cells; channel 1 of 4 sits at pi/2.
  const auto ks = build_kernels({2.0, 0.5, 0.3}, 4, 1.0, M_PI / 2);
  const int kw = 2 * ks.radius + 1;
  for (int dy = -ks.radius; dy <= ks.radius; ++dy) {
    for (int dx = -ks.radius; dx <= ks.radius; ++dx) {
      const double a0 = ks.spatial[0][(dy + ks.radius) * kw + (dx + ks.radius)];
      const double a1 = ks.spatial[1][(dx + ks.radius) * kw + (dy + ks.radius)];
      CHECK(a0 == doctest::Approx(a1).epsilon(1e-9));
    }
  }
}

TEST_CASE("build_kernels: kernels are normalized") {
  const auto ks = build_kernels({0.07, 0.05, 0.06}, 12, 0.1, 2.0 * M_PI / 12);
  for (const auto& kern : ks.spatial) {
    CHECK(std::accumulate(kern.begin(), kern.end(), 0.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  double ang = 0.0;
  for (const auto& [off, w] : ks.angular) ang += w;
  CHECK(ang == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("build_kernels: sub-tenth-cell sigma collapses to an impulse") {
  const auto ks = build_kernels({0.005, 0.005, 0.001}, 8, 0.1, 2.0 * M_PI / 8);
  CHECK(ks.degenerate_spatial);
  CHECK(ks.degenerate_angular);
  CHECK(ks.radius == 0);
  REQUIRE(ks.angular.size() == 1);
  CHECK(ks.angular[0].first == 0);
  CHECK(ks.angular[0].second == 1.0);
  CHECK_THROWS_AS(build_kernels({0.0, 0.1, 0.1}, 8, 0.1, M_PI / 4),
                  std::invalid_argument);
}

TEST_CASE("build_kernels: wide angular sigma folds onto the circle") {
  const auto ks = build_kernels({0.05, 0.05, 2.0}, 8, 0.1, 2.0 * M_PI / 8);
  double sum = 0.0;
  for (const auto& [off, w] : ks.angular) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ks.angular.size() <= 8);
}

TEST_CASE("step: uniform belief over free space is a fixed point at zero motion") {
  ThreadPool pool(2);
  for (int variant = 0; variant < 2; ++variant) {
    const OccupancyMap map =
        variant == 0 ? random_map(24, 20, 0.15, 5) : make_twin_room_map();
    const int channels = 8;
    const MotionNoise noise{0.06, 0.05, 0.06};
    const auto ks = build_kernels(noise, channels, map.resolution(),
                                  2.0 * M_PI / channels);
    const auto act = make_activation(map, ks, channels, pool);
    auto t = init_uniform(map, channels);
    const auto before = t.values();
    StepScratch scratch;
    step(t, {0.0, 0.0, 0.0}, map, ks, act, pool, scratch);
    double worst = 0.0;
    for (std::size_t p = 0; p < before.size(); ++p) {
      if (before[p] == 0.0) {
        CHECK(t.values()[p] == 0.0);
      } else {
        worst = std::max(worst, std::fabs(t.values()[p] - before[p]) / before[p]);
      }
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("step: impulse in open space becomes the normalized stencil") {
  ThreadPool pool(2);
  const auto map = make_empty_room(40, 40, 0.1);
  const int channels = 8;
  const MotionNoise noise{0.06, 0.04, 0.08};
  const auto ks = build_kernels(noise, channels, map.resolution(),
                                2.0 * M_PI / channels);
  const auto act = make_activation(map, ks, channels, pool);
  BeliefTensor t(40, 40, channels, 0.1, 0.0, 0.0);
  const int ic = 20, jc = 20, kc = 3;
  t.at(ic, jc, kc) = 1.0;
  StepScratch scratch;
  step(t, {0.0, 0.0, 0.0}, map, ks, act, pool, scratch);

  // Independent stencil: rotated-Gaussian weights times the angular taps.
  const auto ref = oracle::derive_kernels(noise, channels, 0.1);
  const int r = ref.radius, kw = 2 * r + 1;
  double mass = 0.0;
  for (int k = 0; k < channels; ++k) {
    int dk = std::abs(k - kc);
    dk = std::min(dk, channels - dk);
    double ang = 0.0;
    if (dk <= ref.ang_half) ang = ref.angular[dk + ref.ang_half];
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        const double expect = ang * ref.spatial[kc][(dy + r) * kw + (dx + r)];
        CHECK(t.at(ic + dx, jc + dy, k) == doctest::Approx(expect).epsilon(1e-9));
      }
    }
  }
  for (double v : t.values()) mass += v;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("step: open-space mass is conserved under zero motion") {
  ThreadPool pool(2);
  const auto map = make_empty_room(48, 48, 0.1);
  const int channels = 8;
  const auto ks = build_kernels({0.06, 0.06, 0.05}, channels, 0.1,
                                2.0 * M_PI / channels);
  const auto act = make_activation(map, ks, channels, pool);
  BeliefTensor t(48, 48, channels, 0.1, 0.0, 0.0);
  Rng rng(9);
  for (int k = 0; k < channels; ++k) {
    for (int j = 15; j < 33; ++j) {
      for (int i = 15; i < 33; ++i) t.at(i, j, k) = rng.uniform();
    }
  }
  const double mass_before = total_mass(t);
  StepScratch scratch;
  step(t, {0.0, 0.0, 0.0}, map, ks, act, pool, scratch);
  CHECK(total_mass(t) == doctest::Approx(mass_before).epsilon(1e-9));
}

TEST_CASE("step: mass pushed into a wall is zeroed there yet survives nearby") {
  ThreadPool pool(2);
  const auto map = make_empty_room(24, 24, 0.1);
  const int channels = 8;
  const auto ks = build_kernels({0.05, 0.05, 0.05}, channels, 0.1,
                                2.0 * M_PI / channels);
  const auto act = make_activation(map, ks, channels, pool);
  BeliefTensor t(24, 24, channels, 0.1, 0.0, 0.0);
  t.at(22, 12, 0) = 1.0;  // adjacent to the right wall (i=23 occupied)
  StepScratch scratch;
  // Diffuse once in place so the state has the usual kernel-width spread,
  // then push one cell into the wall.
  step(t, {0.0, 0.0, 0.0}, map, ks, act, pool, scratch);
  step(t, {0.1, 0.0, 0.0}, map, ks, act, pool, scratch);
  for (int j = 0; j < 24; ++j) {
    CHECK(t.at(23, j, 0) == 0.0);
  }
  double remaining = 0.0;
  for (int j = 10; j < 15; ++j) {
    for (int i = 20; i < 23; ++i) remaining += t.at(i, j, 0);
  }
  CHECK(remaining > 0.0);
}

TEST_CASE("step: a bare impulse fully shifted into a wall extinguishes") {
  ThreadPool pool(2);
  const auto map = make_empty_room(24, 24, 0.1);
  const int channels = 8;
  const auto ks = build_kernels({0.05, 0.05, 0.05}, channels, 0.1,
                                2.0 * M_PI / channels);
  const auto act = make_activation(map, ks, channels, pool);
  BeliefTensor t(24, 24, channels, 0.1, 0.0, 0.0);
  t.at(22, 12, 0) = 1.0;
  StepScratch scratch;
  CHECK_THROWS_AS(step(t, {0.1, 0.0, 0.0}, map, ks, act, pool, scratch),
                  BeliefExtinguishedError);
}

TEST_CASE("step: extinguishing every state is a hard error") {
  ThreadPool pool(1);
  // Single free cell; shift the whole belief into the wall.
  std::vector<uint8_t> occ(64, 1);
  occ[3 * 8 + 3] = 0;
  const OccupancyMap map(8, 8, 0.1, std::move(occ));
  const int channels = 4;
  const auto ks = build_kernels({0.001, 0.001, 0.0001}, channels, 0.1,
                                2.0 * M_PI / channels);  // impulse kernels
  const auto act = make_activation(map, ks, channels, pool);
  auto t = init_uniform(map, channels);
  StepScratch scratch;
  CHECK_THROWS_AS(step(t, {0.4, 0.0, 0.0}, map, ks, act, pool, scratch),
                  BeliefExtinguishedError);
}

TEST_CASE("step: shift equivariance in free space with decoupled channels") {
  ThreadPool pool(2);
  const auto map = make_empty_room(48, 48, 0.1);
  const int channels = 8;
  // Tiny angular sigma keeps channels independent so diffusion and the
  // channel-wise shift commute exactly.
  const auto ks = build_kernels({0.05, 0.04, 0.001}, channels, 0.1,
                                2.0 * M_PI / channels);
  const auto act = make_activation(map, ks, channels, pool);
  BeliefTensor a(48, 48, channels, 0.1, 0.0, 0.0);
  Rng rng(31);
  for (int k = 0; k < channels; ++k) {
    for (int j = 20; j < 28; ++j) {
      for (int i = 20; i < 28; ++i) a.at(i, j, k) = rng.uniform();
    }
  }
  BeliefTensor b = a;
  const OdometryDelta u{0.37, 0.21, 0.0};
  StepScratch scratch;
  step(a, u, map, ks, act, pool, scratch);        // shift then diffuse
  step(b, {0.0, 0.0, 0.0}, map, ks, act, pool, scratch);
  apply_motion(b, u);                             // diffuse then shift
  double worst = 0.0;
  double peak = 0.0;
  for (std::size_t p = 0; p < a.values().size(); ++p) {
    worst = std::max(worst, std::fabs(a.values()[p] - b.values()[p]));
    peak = std::max(peak, std::fabs(a.values()[p]));
  }
  CHECK(worst < 1e-9 * std::max(1.0, peak));
}

TEST_CASE("step: linearity probes isolate each channel's contribution") {
  ThreadPool pool(2);
  const auto map = random_map(20, 16, 0.12, 77);
  const int channels = 8;
  const auto ks = build_kernels({0.05, 0.05, 0.06}, channels, 0.1,
                                2.0 * M_PI / channels);
  const auto act = make_activation(map, ks, channels, pool);
  BeliefTensor full(20, 16, channels, 0.1, 0.0, 0.0);
  Rng rng(13);
  for (int k = 0; k < channels; ++k) {
    for (int j = 0; j < 16; ++j) {
      for (int i = 0; i < 20; ++i) {
        if (map.free(i, j)) full.at(i, j, k) = rng.uniform();
      }
    }
  }
  const int probe_channel = 5;
  BeliefTensor only = full, without = full;
  for (int k = 0; k < channels; ++k) {
    for (std::size_t p = 0; p < full.plane_size(); ++p) {
      if (k == probe_channel) {
        without.plane(k)[p] = 0.0;
      } else {
        only.plane(k)[p] = 0.0;
      }
    }
  }
  StepScratch scratch;
  const OdometryDelta u{0.13, -0.07, 0.02};
  step(full, u, map, ks, act, pool, scratch);
  step(only, u, map, ks, act, pool, scratch);
  step(without, u, map, ks, act, pool, scratch);
  for (std::size_t p = 0; p < full.values().size(); ++p) {
    const double sum = only.values()[p] + without.values()[p];
    CHECK(full.values()[p] == doctest::Approx(sum).epsilon(1e-12));
  }
}

TEST_CASE("step: output is bit-identical for any worker count") {
  const auto map = random_map(28, 22, 0.12, 55);
  const int channels = 8;
  const auto ks = build_kernels({0.06, 0.05, 0.05}, channels, 0.1,
                                2.0 * M_PI / channels);
  std::vector<std::vector<double>> results;
  for (int threads : {1, 2, 3}) {
    ThreadPool pool(threads);
    const auto act = make_activation(map, ks, channels, pool);
    auto t = init_uniform(map, channels);
    StepScratch scratch;
    step(t, {0.12, 0.03, 0.04}, map, ks, act, pool, scratch);
    step(t, {-0.06, 0.02, -0.09}, map, ks, act, pool, scratch);
    results.push_back(t.values());
  }
  CHECK(results[0] == results[1]);
  CHECK(results[0] == results[2]);
}

TEST_CASE("step: ten steps match the explicit-summation Bayes filter") {
  ThreadPool pool(2);
  const auto map = random_map(16, 16, 0.15, 42);
  const int channels = 8;
  const MotionNoise noise{0.06, 0.05, 0.07};
  const auto ks = build_kernels(noise, channels, map.resolution(),
                                2.0 * M_PI / channels);
  const auto act = make_activation(map, ks, channels, pool);
  auto t = init_uniform(map, channels);

  const auto ref_ks = oracle::derive_kernels(noise, channels, map.resolution());
  const auto ref_act = oracle::derive_activation(map, ref_ks, channels);
  auto ref = oracle::uniform_tensor(map, channels);

  Rng rng(7);
  StepScratch scratch;
  for (int s = 0; s < 10; ++s) {
    const OdometryDelta u{rng.uniform(-0.15, 0.15), rng.uniform(-0.1, 0.1),
                          rng.uniform(-0.3, 0.3)};
    step(t, u, map, ks, act, pool, scratch);
    ref = oracle::bayes_step(ref, u, map, ref_ks, ref_act);
    CHECK(t.theta_t() == doctest::Approx(ref.theta_t).epsilon(1e-12));
  }
  CHECK(max_abs_diff(t.values(), ref.v) <= 1e-6);
}

TEST_CASE("belief_map: impulse and uniform cases") {
  BeliefTensor t(6, 5, 4, 0.1, 0.0, 0.0);
  t.at(2, 3, 1) = 0.7;
  const auto bm = belief_map(t);
  CHECK(bm.at(2, 3) == 0.7);
  double sum = 0.0;
  for (double v : bm.data) sum += v;
  CHECK(sum == 0.7);
}

TEST_CASE("belief_map: equals the per-cell loop-max oracle") {
  BeliefTensor t(9, 7, 6, 0.1, 0.0, 0.0);
  Rng rng(3);
  for (auto& v : t.values()) v = rng.uniform();
  const auto bm = belief_map(t);
  for (int j = 0; j < 7; ++j) {
    for (int i = 0; i < 9; ++i) {
      double m = 0.0;
      for (int k = 0; k < 6; ++k) m = std::max(m, t.at(i, j, k));
      CHECK(bm.at(i, j) == m);
    }
  }
}

TEST_CASE("argmax_state: impulse reports the exact cell-center pose") {
  BeliefTensor t(10, 10, 8, 0.5, 1.0, -2.0);
  t.at(4, 6, 2) = 3.0;
  t.at(1, 1, 0) = 1.0;
  const auto est = argmax_state(t);
  CHECK(est.i == 4);
  CHECK(est.j == 6);
  CHECK(est.k == 2);
  CHECK(est.pose.x == doctest::Approx(1.0 + 4.5 * 0.5));
  CHECK(est.pose.y == doctest::Approx(-2.0 + 6.5 * 0.5));
  CHECK(est.pose.theta == doctest::Approx(2.0 * (2.0 * M_PI / 8)));
  CHECK(est.confidence == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("argmax_state: ties resolve to the lowest (k, j, i)") {
  BeliefTensor t(8, 8, 4, 0.1, 0.0, 0.0);
  t.at(5, 5, 2) = 1.0;
  t.at(3, 3, 2) = 1.0;  // same channel, earlier (j, i)
  t.at(6, 6, 1) = 1.0;  // earlier channel wins over both
  const auto est = argmax_state(t);
  CHECK(est.k == 1);
  CHECK(est.i == 6);
  CHECK(est.j == 6);
}

TEST_CASE("argmax_state: angle formula includes theta_t and wraps") {
  BeliefTensor t(4, 4, 128, 0.1, 0.0, 0.0);
  t.set_theta_t(0.3);
  t.at(2, 2, 4) = 1.0;
  const auto est = argmax_state(t);
  CHECK(est.pose.theta ==
        doctest::Approx(4.0 * (2.0 * M_PI / 128) + 0.3).epsilon(1e-12));
  t.set_theta_t(10.0);  // wraps into [-pi, pi)
  const auto est2 = argmax_state(t);
  CHECK(est2.pose.theta >= -M_PI);
  CHECK(est2.pose.theta < M_PI);
  CHECK(est2.pose.theta ==
        doctest::Approx(wrap_angle(4.0 * (2.0 * M_PI / 128) + 10.0)));
}

TEST_CASE("argmax_state: empty tensor is a hard error") {
  BeliefTensor t(4, 4, 4, 0.1, 0.0, 0.0);
  CHECK_THROWS_AS(argmax_state(t), BeliefExtinguishedError);
}

TEST_CASE("belief snapshot: write and read back") {
  BeliefTensor t(7, 5, 4, 0.25, 0.0, 0.0);
  Rng rng(8);
  for (auto& v : t.values()) v = rng.uniform();
  t.set_theta_t(1.25);
  const auto tmp = std::filesystem::temp_directory_path() / "gridloc_t.blf";
  write_belief_snapshot(t, tmp.string());
  const auto back = read_belief_snapshot(tmp.string(), 0.25, 0.0, 0.0);
  CHECK(back.width() == 7);
  CHECK(back.height() == 5);
  CHECK(back.channels() == 4);
  CHECK(back.theta_t() == doctest::Approx(1.25));
  for (std::size_t p = 0; p < t.values().size(); ++p) {
    CHECK(back.values()[p] ==
          doctest::Approx(t.values()[p]).epsilon(1e-6));  // float32 payload
  }
  std::filesystem::remove(tmp);
}
