#include "lrcal/optimizer.hpp"

#include "lrcal/error.hpp"
#include "lrcal/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace lrcal;

namespace {

Vector6 vec(double a, double b, double c, double d, double e, double f) {
  Vector6 v;
  v << a, b, c, d, e, f;
  return v;
}

bool in_bounds(const Vector6& x, const OptimizerConfig& cfg) {
  const Vector6 lo = cfg.lower_bounds();
  const Vector6 hi = cfg.upper_bounds();
  for (int k = 0; k < 6; ++k) {
    if (x[k] < lo[k] || x[k] > hi[k]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("finite-difference gradient matches analytic gradients") {
  const OptimizerConfig cfg;

  SUBCASE("quadratic: central differences are exact") {
    const Vector6 c = vec(1, -2, 3, 0.4, -0.6, 0.9);
    const Objective f = [&](const Vector6& x) { return (x - c).squaredNorm(); };
    const Vector6 x = vec(2, 1, -4, 0.1, 0.3, -0.2);
    const Vector6 g = finite_difference_gradient(f, x, f(x), cfg);
    const Vector6 expect = 2.0 * (x - c);
    for (int k = 0; k < 6; ++k) {
      CHECK(g[k] == doctest::Approx(expect[k]).epsilon(1e-9));
    }
  }

  SUBCASE("trigonometric: error is O(step^2) inside the box") {
    const Objective f = [](const Vector6& x) {
      return std::sin(0.1 * x[0]) + std::cos(0.2 * x[1]) + std::sin(x[3]) +
             0.5 * std::cos(x[4]) + 0.1 * x[2] + x[5] * x[5];
    };
    const Vector6 x = vec(0.5, -1.0, 2.0, 0.2, -0.4, 0.3);
    const Vector6 g = finite_difference_gradient(f, x, f(x), cfg);
    const Vector6 expect = vec(0.1 * std::cos(0.05), -0.2 * std::sin(-0.2), 0.1,
                               std::cos(0.2), -0.5 * std::sin(-0.4), 0.6);
    for (int k = 0; k < 6; ++k) {
      const double step = cfg.relative_steps[static_cast<std::size_t>(k)] *
                          std::max(std::abs(x[k]), kFiniteDifferenceFloor[static_cast<std::size_t>(k)]);
      CHECK(std::abs(g[k] - expect[k]) < step * step);
    }
  }

  SUBCASE("one-sided at the bounds stays inside the box") {
    int outside_probes = 0;
    const Objective f = [&](const Vector6& x) {
      if (!in_bounds(x, cfg)) ++outside_probes;
      return x.squaredNorm();
    };
    const Vector6 x = vec(10.0, -10.0, 9.99, 2.0, -2.0, 1.999);
    finite_difference_gradient(f, x, f(x), cfg);
    CHECK(outside_probes == 0);
  }
}

TEST_CASE("minimize solves a bounded quadratic to the analytic minimum") {
  const OptimizerConfig cfg;
  const Vector6 c = vec(4.0, -3.0, 7.5, 1.2, -0.7, 0.9);
  const Objective f = [&](const Vector6& x) { return (x - c).squaredNorm(); };
  const OptimizationResult r = minimize(f, Vector6::Zero(), cfg);

  const Vector6 x = to_vector(r.extrinsics);
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs(x[k] - c[k]) < 1e-3);
  }
  CHECK(r.iterations <= 100);
  CHECK(r.converged);

  // Every iterate respects the bounds and the trace is non-increasing.
  double prev = std::numeric_limits<double>::infinity();
  for (const TracePoint& tp : r.trace) {
    CHECK(in_bounds(tp.x, cfg));
    CHECK(tp.cost <= prev);
    prev = tp.cost;
  }
  CHECK(r.trace.front().x == Vector6::Zero());
  CHECK(r.final_cost == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("minimize clips a quadratic with an exterior minimum to the box") {
  const OptimizerConfig cfg;
  const Vector6 c = vec(14.0, -3.0, -12.0, 3.1, -0.7, -2.6);
  const Objective f = [&](const Vector6& x) { return (x - c).squaredNorm(); };
  const OptimizationResult r = minimize(f, Vector6::Zero(), cfg);

  const Vector6 lo = cfg.lower_bounds();
  const Vector6 hi = cfg.upper_bounds();
  const Vector6 x = to_vector(r.extrinsics);
  for (int k = 0; k < 6; ++k) {
    const double proj = std::min(std::max(c[k], lo[k]), hi[k]);
    CHECK(std::abs(x[k] - proj) < 1e-3);
  }
  for (const TracePoint& tp : r.trace) CHECK(in_bounds(tp.x, cfg));
}

TEST_CASE("minimize on an anisotropic quadratic") {
  const OptimizerConfig cfg;
  const Vector6 c = vec(2.0, -6.0, 1.0, 0.3, 1.4, -1.1);
  const Vector6 w = vec(1.0, 5.0, 0.2, 40.0, 4.0, 9.0);
  const Objective f = [&](const Vector6& x) {
    return (x - c).cwiseProduct(w.cwiseSqrt()).squaredNorm();
  };
  const OptimizationResult r = minimize(f, Vector6::Zero(), cfg);
  const Vector6 x = to_vector(r.extrinsics);
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs(x[k] - c[k]) < 1e-3);
  }
}

TEST_CASE("minimize terminates immediately on a constant objective") {
  const OptimizerConfig cfg;
  const Objective f = [](const Vector6&) { return 3.5; };
  const Vector6 x0 = vec(1, 2, 3, 0.1, 0.2, 0.3);
  const OptimizationResult r = minimize(f, x0, cfg);
  CHECK(r.iterations == 1);
  CHECK(r.converged);
  CHECK(to_vector(r.extrinsics) == x0);
  CHECK(r.final_cost == 3.5);
}

TEST_CASE("minimize validates inputs") {
  const OptimizerConfig cfg;
  const Objective f = [](const Vector6& x) { return x.squaredNorm(); };
  CHECK_THROWS_AS(minimize(f, vec(11, 0, 0, 0, 0, 0), cfg), std::invalid_argument);
  CHECK_THROWS_AS(minimize(f, vec(0, 0, 0, 0, 0, -2.5), cfg), std::invalid_argument);

  const Objective bad = [](const Vector6&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(minimize(bad, Vector6::Zero(), cfg), OptimizationError);

  OptimizerConfig broken;
  broken.termination_tol = 0.0;
  CHECK_THROWS_AS(minimize(f, Vector6::Zero(), broken), std::invalid_argument);
}

TEST_CASE("multistart escapes a local trap at the zero start") {
  // Two quadratic basins: a local minimum of value 5 at the origin and the
  // global minimum of value 0 at b. The boundary between them is a
  // halfspace, so random in-bounds restarts land in the global basin with
  // decent probability.
  const Vector6 b = vec(6.0, -5.0, 6.0, 1.2, -1.0, 0.8);
  const Objective f = [&](const Vector6& x) {
    return std::min(x.squaredNorm() + 5.0, (x - b).squaredNorm());
  };
  OptimizerConfig cfg;
  cfg.restarts = 10;

  const OptimizationResult trapped = minimize(f, Vector6::Zero(), cfg);
  CHECK(trapped.final_cost == doctest::Approx(5.0).epsilon(1e-6));

  const OptimizationResult r = multistart_minimize(f, Vector6::Zero(), cfg, 123);
  const Vector6 x = to_vector(r.extrinsics);
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs(x[k] - b[k]) < 1e-2);
  }
  CHECK(r.final_cost < 1e-4);
  CHECK(r.attempt_index > 0);

  // The winner beats every individual attempt.
  const auto starts = multistart_starts(cfg, 123, Vector6::Zero());
  CHECK(starts.size() == 11);
  for (const Vector6& s : starts) {
    CHECK(minimize(f, s, cfg).final_cost >= r.final_cost - 1e-12);
  }
}

TEST_CASE("multistart with zero restarts equals a single minimize") {
  const Vector6 c = vec(1.0, 2.0, -3.0, 0.5, 0.25, -0.5);
  const Objective f = [&](const Vector6& x) { return (x - c).squaredNorm(); };
  OptimizerConfig cfg;
  cfg.restarts = 0;
  const OptimizationResult a = minimize(f, Vector6::Zero(), cfg);
  const OptimizationResult b = multistart_minimize(f, Vector6::Zero(), cfg, 77);
  CHECK(to_vector(a.extrinsics) == to_vector(b.extrinsics));
  CHECK(a.final_cost == b.final_cost);
  CHECK(b.attempt_index == 0);
}

TEST_CASE("calibrate on synthetic frame pairs") {
  const Scene scene = canonical_scene();
  const LidarModel lidar = LidarModel::uniform(41, -3.0, 3.0, 1.0);
  RadarModel radar;
  radar.range_bins = 1200;  // ~52 m is plenty for the canonical scene

  const Extrinsics gt{2.0, -1.0, 3.0, 0.2, -0.3, 0.15};
  const SensorPair pair = generate_pair(scene, lidar, radar, gt, 42);
  const CostConfig ccfg;
  OptimizerConfig ocfg;

  std::vector<std::vector<Point3>> clouds{pair.cloud};
  std::vector<OccupancyGridIndex> grids{build_grid(pair.scan, ccfg.v_th)};

  SUBCASE("starting at the optimum stays within one finite-difference step") {
    const OptimizationResult r = calibrate(clouds, grids, gt, ocfg, ccfg);
    const Vector6 x = to_vector(r.extrinsics);
    const Vector6 g = to_vector(gt);
    for (int k = 0; k < 6; ++k) {
      const double step = ocfg.relative_steps[static_cast<std::size_t>(k)] *
                          std::max(std::abs(g[k]), kFiniteDifferenceFloor[static_cast<std::size_t>(k)]);
      CHECK(std::abs(x[k] - g[k]) <= step + 1e-12);
    }
    CHECK(r.final_cost > 0.0);
  }

  SUBCASE("final cost equals re-evaluating the summed total cost") {
    std::vector<std::vector<Point3>> clouds2{pair.cloud, pair.cloud};
    std::vector<OccupancyGridIndex> grids2{grids[0], grids[0]};
    const OptimizationResult r = calibrate(clouds2, grids2, gt, ocfg, ccfg);
    double expect = 0.0;
    for (std::size_t i = 0; i < clouds2.size(); ++i) {
      expect += total_cost(clouds2[i], r.extrinsics, grids2[i], ccfg).total;
    }
    CHECK(r.final_cost == doctest::Approx(expect).epsilon(1e-12));
  }

  SUBCASE("mismatched sequence lengths are an input error") {
    std::vector<std::vector<Point3>> two{pair.cloud, pair.cloud};
    CHECK_THROWS_AS(calibrate(two, grids, gt, ocfg, ccfg), std::invalid_argument);
    CHECK_THROWS_AS(calibrate({}, {}, gt, ocfg, ccfg), std::invalid_argument);
  }

  SUBCASE("multistart is deterministic for a fixed seed") {
    ocfg.restarts = 1;
    ocfg.max_iterations = 40;
    const OptimizationResult a =
        calibrate_multistart(clouds, grids, ocfg, ccfg, 2024);
    const OptimizationResult b =
        calibrate_multistart(clouds, grids, ocfg, ccfg, 2024);
    CHECK(to_vector(a.extrinsics) == to_vector(b.extrinsics));
    CHECK(a.final_cost == b.final_cost);
    CHECK(a.attempt_index == b.attempt_index);
    CHECK(a.iterations == b.iterations);
  }
}
