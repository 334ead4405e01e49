#pragma once

#include "lrcal/geometry.hpp"
#include "lrcal/radar_grid.hpp"

#include <cstdint>
#include <vector>

namespace lrcal {

// Vertical factor shape. CenterPeaked is the default: a normalized bump
// that is 1 at the cell's vertical center and 0 at its boundaries.
// Literal is the unnormalized reciprocal form h^2 / (2*d_u^2*d_l^2), which
// grows without bound toward the boundaries and is therefore capped; it is
// kept behind config for comparison experiments. Values produced by the two
// variants are not comparable (Literal carries 1/length^2 units).
enum class HeightVariant { CenterPeaked, Literal };

struct CostConfig {
  std::uint8_t v_th = 50;  // validity threshold: cells at or below score 0
  std::uint8_t w_th = 80;  // weight-enhanced threshold
  double high_intensity_weight = 1.5;
  HeightVariant height_variant = HeightVariant::CenterPeaked;
  double literal_cap = 1e6;

  // Throws std::invalid_argument unless 0 <= v_th < w_th <= 255,
  // high_intensity_weight >= 1 and literal_cap > 0.
  void validate() const;
};

struct CostReport {
  double total = 0.0;               // phi, equal to sum_weighted
  std::size_t hit_count = 0;        // points with a strictly positive cost
  std::size_t points_evaluated = 0;
  double sum_indicator = 0.0;       // number of points inside occupied cells
  double sum_height = 0.0;          // sum of indicator * height factor
  double sum_weighted = 0.0;        // sum of indicator * height * intensity
  HeightVariant height_variant = HeightVariant::CenterPeaked;
};

// 1 if the point lies inside an occupied wedge cell, else 0.
double indicator(const CylindricalPoint& p, const OccupancyGridIndex& index);

// Vertical factor for a point at height z inside a wedge of height h,
// with d_u = h/2 - z and d_l = z + h/2. Requires h > 0; the caller
// guarantees |z| <= h/2.
double height_restrainer(double z, double h, const CostConfig& cfg);

// Piecewise-constant weight over intensity bands:
// high_intensity_weight above w_th, 1 in (v_th, w_th], 0 otherwise.
double intensity_factor(std::uint8_t cell_intensity, const CostConfig& cfg);

// Product indicator * height_restrainer * intensity_factor, 0 on a miss.
double point_cost(const CylindricalPoint& p, const OccupancyGridIndex& index,
                  const CostConfig& cfg);

// Sums point_cost over the transformed cloud (compensated accumulation, so
// the reported totals are insensitive to point order). Throws
// std::invalid_argument on an empty cloud.
CostReport total_cost(const std::vector<Point3>& cloud, const Extrinsics& e,
                      const OccupancyGridIndex& index, const CostConfig& cfg);

}  // namespace lrcal
