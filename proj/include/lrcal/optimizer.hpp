#pragma once

#include "lrcal/cost.hpp"
#include "lrcal/geometry.hpp"
#include "lrcal/radar_grid.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace lrcal {

// Box bounds are symmetric: rotations in [-bounds_rotation_deg,
// +bounds_rotation_deg], translations in [-bounds_translation_m,
// +bounds_translation_m]. relative_steps scale the finite-difference
// probes per parameter, ordered (theta_x, theta_y, theta_z, t_x, t_y, t_z).
struct OptimizerConfig {
  double bounds_rotation_deg = 10.0;
  double bounds_translation_m = 2.0;
  std::array<double, 6> relative_steps{0.2, 0.2, 0.1, 0.1, 0.1, 0.1};
  double termination_tol = 0.001;  // relative cost reduction between accepted iterates
  int max_iterations = 200;
  int restarts = 2;  // random restarts in calibrate_multistart

  void validate() const;
  Vector6 lower_bounds() const;
  Vector6 upper_bounds() const;
};

// Absolute floors for the finite-difference step, so probes stay at the
// cost function's bin granularity even when a parameter sits at zero:
// 1 degree for angles, 0.05 m for translations.
inline constexpr std::array<double, 6> kFiniteDifferenceFloor{1.0, 1.0, 1.0,
                                                              0.05, 0.05, 0.05};

using Objective = std::function<double(const Vector6&)>;

struct TracePoint {
  Vector6 x;
  double cost = 0.0;
};

struct OptimizationResult {
  Extrinsics extrinsics;
  double final_cost = 0.0;  // objective value for minimize, phi for calibrate
  int iterations = 0;
  std::vector<TracePoint> trace;  // accepted iterates, starting at x0
  bool converged = false;
  int attempt_index = 0;
};

// Per-parameter step h_k = relative_steps[k] * max(|x_k|, floor_k).
// Central differences where both probes fit inside the bounds, one-sided
// into the feasible box otherwise. f_x is the objective value at x.
Vector6 finite_difference_gradient(const Objective& objective, const Vector6& x,
                                   double f_x, const OptimizerConfig& cfg);

// Bound-constrained trust-region minimization with finite-difference
// gradients, a BFGS model and reflective handling of steps that leave the
// box. Only improving steps are accepted; terminates when the relative
// cost reduction of an accepted step drops below termination_tol, the
// trust region collapses, or max_iterations is reached.
// Throws std::invalid_argument if x0 violates the bounds and
// OptimizationError if the objective returns a non-finite value.
OptimizationResult minimize(const Objective& objective, const Vector6& x0,
                            const OptimizerConfig& cfg);

// The attempt starting points used by multistart: x0 first, then
// cfg.restarts points drawn uniformly over the bound box from the seed.
std::vector<Vector6> multistart_starts(const OptimizerConfig& cfg,
                                       std::uint64_t seed, const Vector6& x0);

// Runs minimize from every multistart start and returns the attempt with
// the lowest final objective value (ties go to the earlier attempt);
// attempt_index records the winner. Deterministic for a fixed seed.
OptimizationResult multistart_minimize(const Objective& objective,
                                       const Vector6& x0,
                                       const OptimizerConfig& cfg,
                                       std::uint64_t seed);

// Maximizes the spatial-consistency cost summed over frame pairs by
// minimizing its negative. final_cost and the trace report phi.
OptimizationResult calibrate(const std::vector<std::vector<Point3>>& clouds,
                             const std::vector<OccupancyGridIndex>& grids,
                             const Extrinsics& x0, const OptimizerConfig& ocfg,
                             const CostConfig& ccfg);

// Runs calibrate from x0 (default identity) plus cfg.restarts uniformly
// random in-bounds starts drawn from the seed, and returns the attempt
// with the highest phi. Deterministic for a fixed seed.
OptimizationResult calibrate_multistart(
    const std::vector<std::vector<Point3>>& clouds,
    const std::vector<OccupancyGridIndex>& grids, const OptimizerConfig& ocfg,
    const CostConfig& ccfg, std::uint64_t seed,
    const Extrinsics& x0 = Extrinsics::identity());

}  // namespace lrcal
