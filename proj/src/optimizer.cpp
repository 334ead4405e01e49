#include "lrcal/optimizer.hpp"

#include "lrcal/error.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lrcal {

namespace {

constexpr double kGradientTol = 1e-12;
constexpr double kRadiusMin = 1e-8;
constexpr double kRadiusMax = 50.0;
constexpr double kRadiusInit = 1.0;

std::string vec_to_string(const Vector6& v) {
  std::ostringstream os;
  os << "(" << v[0] << ", " << v[1] << ", " << v[2] << ", " << v[3] << ", "
     << v[4] << ", " << v[5] << ")";
  return os.str();
}

double eval_checked(const Objective& objective, const Vector6& x) {
  const double f = objective(x);
  if (!std::isfinite(f)) {
    throw OptimizationError("objective returned a non-finite value at x = " +
                            vec_to_string(x));
  }
  return f;
}

// Folds a coordinate that left [lo, hi] back inside by mirroring at the
// violated bound (triangle wave with period 2*(hi - lo)).
double reflect_coord(double v, double lo, double hi) {
  if (v >= lo && v <= hi) return v;
  const double width = hi - lo;
  double y = std::fmod(v - lo, 2.0 * width);
  if (y < 0.0) y += 2.0 * width;
  return lo + (y <= width ? y : 2.0 * width - y);
}

Vector6 reflect_into_bounds(const Vector6& v, const Vector6& lo, const Vector6& hi) {
  Vector6 out;
  for (int k = 0; k < 6; ++k) out[k] = reflect_coord(v[k], lo[k], hi[k]);
  return out;
}

Vector6 clamp_into_bounds(const Vector6& v, const Vector6& lo, const Vector6& hi) {
  Vector6 out;
  for (int k = 0; k < 6; ++k) out[k] = std::min(std::max(v[k], lo[k]), hi[k]);
  return out;
}

// Dogleg step for the model f + g's + s'Ds/2 (D positive diagonal)
// within radius delta.
Vector6 dogleg_step(const Vector6& D, const Vector6& g, double delta) {
  const Vector6 newton = -g.cwiseQuotient(D);
  if (newton.norm() <= delta && newton.allFinite()) return newton;

  const double quad = D.cwiseProduct(g).dot(g);  // g' D g
  if (!(quad > 0.0)) return -(delta / g.norm()) * g;

  const Vector6 cauchy = -(g.squaredNorm() / quad) * g;
  if (cauchy.norm() >= delta) return -(delta / g.norm()) * g;

  // Walk from the Cauchy point toward the Newton point until the radius.
  const Vector6 d = newton - cauchy;
  const double a = d.squaredNorm();
  const double b = 2.0 * cauchy.dot(d);
  const double c = cauchy.squaredNorm() - delta * delta;
  const double disc = std::max(b * b - 4.0 * a * c, 0.0);
  const double tau = a > 0.0 ? (-b + std::sqrt(disc)) / (2.0 * a) : 0.0;
  return cauchy + std::min(std::max(tau, 0.0), 1.0) * d;
}

void fd_gradient_and_curvature(const Objective& objective, const Vector6& x,
                               double f_x, const OptimizerConfig& cfg,
                               Vector6& gradient, Vector6& curvature);

struct ScaledProblem {
  const Objective* objective;
  Vector6 scale;  // raw units per scaled unit
  Vector6 lo;     // scaled bounds
  Vector6 hi;
  const OptimizerConfig* cfg;

  Vector6 to_raw(const Vector6& u) const { return u.cwiseProduct(scale); }

  double eval(const Vector6& u) const {
    return eval_checked(*objective, to_raw(u));
  }

  // Scaled gradient plus the model's diagonal curvature. Axes without a
  // usable second difference (one-sided probes, flat or concave samples)
  // keep their previous diagonal entry.
  Vector6 gradient(const Vector6& u, double f_u, Vector6& model_diag) const {
    Vector6 g_raw, c_raw;
    fd_gradient_and_curvature(*objective, to_raw(u), f_u, *cfg, g_raw, c_raw);
    for (int k = 0; k < 6; ++k) {
      const double d = c_raw[k] * scale[k] * scale[k];
      if (std::isfinite(d) && d > 1e-10) {
        model_diag[k] = std::min(d, 1e12);
      }
    }
    return g_raw.cwiseProduct(scale);
  }
};

}  // namespace

void OptimizerConfig::validate() const {
  if (!(bounds_rotation_deg > 0.0) || !(bounds_translation_m > 0.0)) {
    throw std::invalid_argument("optimizer config: bounds must be positive");
  }
  for (double s : relative_steps) {
    if (!(s > 0.0)) {
      throw std::invalid_argument("optimizer config: relative_steps must be positive");
    }
  }
  if (!(termination_tol > 0.0)) {
    throw std::invalid_argument("optimizer config: termination_tol must be > 0");
  }
  if (max_iterations < 1) {
    throw std::invalid_argument("optimizer config: max_iterations must be >= 1");
  }
  if (restarts < 0) {
    throw std::invalid_argument("optimizer config: restarts must be >= 0");
  }
}

Vector6 OptimizerConfig::lower_bounds() const {
  Vector6 lo;
  lo << -bounds_rotation_deg, -bounds_rotation_deg, -bounds_rotation_deg,
      -bounds_translation_m, -bounds_translation_m, -bounds_translation_m;
  return lo;
}

Vector6 OptimizerConfig::upper_bounds() const { return -lower_bounds(); }

namespace {

// Central differences where both probes fit in the box, one-sided at the
// bounds. The same probes yield a per-axis second difference, so the local
// quadratic model's diagonal curvature comes for free; curvature[k] is NaN
// where only a one-sided probe was possible.
void fd_gradient_and_curvature(const Objective& objective, const Vector6& x,
                               double f_x, const OptimizerConfig& cfg,
                               Vector6& gradient, Vector6& curvature) {
  const Vector6 lo = cfg.lower_bounds();
  const Vector6 hi = cfg.upper_bounds();
  for (int k = 0; k < 6; ++k) {
    const double h = cfg.relative_steps[static_cast<std::size_t>(k)] *
                     std::max(std::abs(x[k]), kFiniteDifferenceFloor[static_cast<std::size_t>(k)]);
    Vector6 xp = x;
    Vector6 xm = x;
    xp[k] += h;
    xm[k] -= h;
    const bool plus_ok = xp[k] <= hi[k];
    const bool minus_ok = xm[k] >= lo[k];
    if (plus_ok && minus_ok) {
      const double fp = eval_checked(objective, xp);
      const double fm = eval_checked(objective, xm);
      gradient[k] = (fp - fm) / (2.0 * h);
      curvature[k] = (fp - 2.0 * f_x + fm) / (h * h);
    } else if (minus_ok) {
      gradient[k] = (f_x - eval_checked(objective, xm)) / h;
      curvature[k] = std::numeric_limits<double>::quiet_NaN();
    } else {
      gradient[k] = (eval_checked(objective, xp) - f_x) / h;
      curvature[k] = std::numeric_limits<double>::quiet_NaN();
    }
  }
}

}  // namespace

Vector6 finite_difference_gradient(const Objective& objective, const Vector6& x,
                                   double f_x, const OptimizerConfig& cfg) {
  Vector6 g, c;
  fd_gradient_and_curvature(objective, x, f_x, cfg, g, c);
  return g;
}

OptimizationResult minimize(const Objective& objective, const Vector6& x0,
                            const OptimizerConfig& cfg) {
  cfg.validate();
  const Vector6 lo_raw = cfg.lower_bounds();
  const Vector6 hi_raw = cfg.upper_bounds();
  for (int k = 0; k < 6; ++k) {
    if (x0[k] < lo_raw[k] || x0[k] > hi_raw[k]) {
      throw std::invalid_argument("minimize: x0 outside bounds at parameter " +
                                  std::to_string(k) + ": " + vec_to_string(x0));
    }
  }

  // Internal trust-region metric: one unit is one degree or 0.25 m, which
  // keeps the bound box roughly isotropic (spans 20 x 16 units by default).
  ScaledProblem prob;
  prob.objective = &objective;
  prob.scale << 1.0, 1.0, 1.0, 0.25, 0.25, 0.25;
  prob.lo = lo_raw.cwiseQuotient(prob.scale);
  prob.hi = hi_raw.cwiseQuotient(prob.scale);
  prob.cfg = &cfg;

  Vector6 u = x0.cwiseQuotient(prob.scale);
  double f = prob.eval(u);

  OptimizationResult result;
  result.trace.push_back(TracePoint{x0, f});

  Vector6 model_diag = Vector6::Ones();
  Vector6 g = prob.gradient(u, f, model_diag);
  double radius = kRadiusInit;
  bool converged = false;
  int iter = 0;

  while (iter < cfg.max_iterations) {
    ++iter;
    if (g.lpNorm<Eigen::Infinity>() < kGradientTol) {
      converged = true;
      break;
    }

    bool accepted = false;
    bool step_quality_ok = false;
    double rel_reduction = 0.0;
    while (radius >= kRadiusMin) {
      const Vector6 s = dogleg_step(model_diag, g, radius);

      // Reflective handling with a projection fallback: fold the raw
      // candidate back into the box, and keep whichever of the folded and
      // clamped candidates the model likes better.
      const Vector6 u_raw = u + s;
      const Vector6 u_refl = reflect_into_bounds(u_raw, prob.lo, prob.hi);
      const Vector6 u_clmp = clamp_into_bounds(u_raw, prob.lo, prob.hi);
      const auto model_reduction = [&](const Vector6& cand) {
        const Vector6 d = cand - u;
        return -(g.dot(d) + 0.5 * d.dot(model_diag.cwiseProduct(d)));
      };
      const double pred_refl = model_reduction(u_refl);
      const double pred_clmp = model_reduction(u_clmp);
      const Vector6 u_cand = pred_refl >= pred_clmp ? u_refl : u_clmp;
      const double pred = std::max(pred_refl, pred_clmp);
      const Vector6 step = u_cand - u;

      if (!(pred > 0.0) || step.norm() == 0.0) {
        radius *= 0.25;
        continue;
      }

      const double f_cand = prob.eval(u_cand);
      const double actual = f - f_cand;
      if (actual > 0.0) {
        const double rho = actual / pred;
        if (rho > 0.75 && step.norm() >= 0.8 * radius) {
          radius = std::min(2.0 * radius, kRadiusMax);
        } else if (rho < 0.25) {
          radius = std::max(0.25 * step.norm(), kRadiusMin);
        }
        // A small relative reduction only counts as convergence when the
        // model agreed with the step; poor steps shrink the region instead.
        step_quality_ok = rho > 0.25;

        const Vector6 g_new = prob.gradient(u_cand, f_cand, model_diag);

        rel_reduction = actual / std::max({std::abs(f), std::abs(f_cand), 1e-12});
        u = u_cand;
        f = f_cand;
        g = g_new;
        result.trace.push_back(TracePoint{prob.to_raw(u), f});
        accepted = true;
        break;
      }
      radius = 0.25 * std::min(radius, std::max(step.norm(), kRadiusMin));
    }

    if (!accepted) {
      // Trust region collapsed without an improving step: locally stationary
      // at the resolution of the finite-difference probes.
      converged = true;
      break;
    }
    if (step_quality_ok && rel_reduction < cfg.termination_tol) {
      converged = true;
      break;
    }
  }

  result.extrinsics = extrinsics_from_vector(prob.to_raw(u));
  result.final_cost = f;
  result.iterations = iter;
  result.converged = converged;
  return result;
}

std::vector<Vector6> multistart_starts(const OptimizerConfig& cfg,
                                       std::uint64_t seed, const Vector6& x0) {
  cfg.validate();
  std::vector<Vector6> starts;
  starts.push_back(x0);
  std::mt19937_64 rng(seed);
  const Vector6 lo = cfg.lower_bounds();
  const Vector6 hi = cfg.upper_bounds();
  const auto uniform01 = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  for (int i = 0; i < cfg.restarts; ++i) {
    Vector6 v;
    for (int k = 0; k < 6; ++k) v[k] = lo[k] + (hi[k] - lo[k]) * uniform01();
    starts.push_back(v);
  }
  return starts;
}

OptimizationResult multistart_minimize(const Objective& objective,
                                       const Vector6& x0,
                                       const OptimizerConfig& cfg,
                                       std::uint64_t seed) {
  const std::vector<Vector6> starts = multistart_starts(cfg, seed, x0);
  OptimizationResult best;
  bool have_best = false;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    OptimizationResult attempt = minimize(objective, starts[i], cfg);
    attempt.attempt_index = static_cast<int>(i);
    if (!have_best || attempt.final_cost < best.final_cost) {
      best = std::move(attempt);
      have_best = true;
    }
  }
  return best;
}

namespace {

Objective frame_objective(const std::vector<std::vector<Point3>>& clouds,
                          const std::vector<OccupancyGridIndex>& grids,
                          const CostConfig& ccfg) {
  if (clouds.size() != grids.size()) {
    throw std::invalid_argument("calibrate: clouds and grids differ in length");
  }
  if (clouds.empty()) {
    throw std::invalid_argument("calibrate: no frame pairs");
  }
  ccfg.validate();
  return [&clouds, &grids, ccfg](const Vector6& v) {
    const Extrinsics e = extrinsics_from_vector(v);
    double phi = 0.0;
    for (std::size_t i = 0; i < clouds.size(); ++i) {
      phi += total_cost(clouds[i], e, grids[i], ccfg).total;
    }
    return -phi;
  };
}

OptimizationResult flip_to_phi(OptimizationResult result) {
  result.final_cost = -result.final_cost;
  for (TracePoint& tp : result.trace) tp.cost = -tp.cost;
  return result;
}

}  // namespace

OptimizationResult calibrate(const std::vector<std::vector<Point3>>& clouds,
                             const std::vector<OccupancyGridIndex>& grids,
                             const Extrinsics& x0, const OptimizerConfig& ocfg,
                             const CostConfig& ccfg) {
  // Coarse-to-fine: far from the solution the exact cost is a noisy
  // near-zero floor (range bins decorrelate within one misaligned bin), so
  // the first passes run against radially max-pooled grids with a widened
  // beam cone, whose basin spans the whole bound box. Each pass only
  // supplies the next start; the reported result is the minimize over the
  // original grids.
  struct Stage {
    int range_factor;
    double beamwidth_scale;
  };
  constexpr Stage kStages[] = {{16, 4.0}, {4, 2.0}, {1, 1.0}};

  Vector6 x = to_vector(x0);
  OptimizationResult result;
  int total_iterations = 0;
  for (const Stage& stage : kStages) {
    std::vector<OccupancyGridIndex> stage_grids;
    const std::vector<OccupancyGridIndex>* active = &grids;
    OptimizerConfig stage_cfg = ocfg;
    if (stage.range_factor != 1 || stage.beamwidth_scale != 1.0) {
      stage_grids.reserve(grids.size());
      for (const OccupancyGridIndex& g : grids) {
        stage_grids.push_back(g.coarsened(stage.range_factor, stage.beamwidth_scale));
      }
      active = &stage_grids;
      // Coarse passes only seed the next start; don't let them burn the
      // whole iteration budget crawling on a blurred surface.
      stage_cfg.max_iterations = std::max(1, ocfg.max_iterations / 4);
    }
    const Objective objective = frame_objective(clouds, *active, ccfg);
    result = minimize(objective, x, stage_cfg);
    x = to_vector(result.extrinsics);
    total_iterations += result.iterations;
  }
  result.iterations = total_iterations;
  return flip_to_phi(std::move(result));
}

OptimizationResult calibrate_multistart(
    const std::vector<std::vector<Point3>>& clouds,
    const std::vector<OccupancyGridIndex>& grids, const OptimizerConfig& ocfg,
    const CostConfig& ccfg, std::uint64_t seed, const Extrinsics& x0) {
  // Every attempt runs the full coarse-to-fine calibrate, so a distant
  // random start still reaches the fine basin before the winner is picked.
  const std::vector<Vector6> starts = multistart_starts(ocfg, seed, to_vector(x0));
  OptimizationResult best;
  bool have_best = false;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    OptimizationResult attempt =
        calibrate(clouds, grids, extrinsics_from_vector(starts[i]), ocfg, ccfg);
    attempt.attempt_index = static_cast<int>(i);
    if (!have_best || attempt.final_cost > best.final_cost) {
      best = std::move(attempt);
      have_best = true;
    }
  }
  return best;
}

}  // namespace lrcal
