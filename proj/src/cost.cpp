#include "lrcal/cost.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lrcal {

namespace {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

void CostConfig::validate() const {
  if (!(v_th < w_th)) {
    throw std::invalid_argument("cost config: requires v_th < w_th");
  }
  if (!(high_intensity_weight >= 1.0)) {
    throw std::invalid_argument("cost config: high_intensity_weight must be >= 1");
  }
  if (!(literal_cap > 0.0)) {
    throw std::invalid_argument("cost config: literal_cap must be > 0");
  }
}

double indicator(const CylindricalPoint& p, const OccupancyGridIndex& index) {
  return index.locate(p) ? 1.0 : 0.0;
}

double height_restrainer(double z, double h, const CostConfig& cfg) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("height_restrainer: h must be > 0");
  }
  const double d_u = h / 2.0 - z;
  const double d_l = z + h / 2.0;
  if (cfg.height_variant == HeightVariant::CenterPeaked) {
    const double v = 4.0 * d_u * d_l / (h * h);  // 1 - (2z/h)^2
    return v * v;
  }
  const double denom = 2.0 * d_u * d_u * d_l * d_l;
  if (denom <= 0.0) return cfg.literal_cap;
  return std::min(h * h / denom, cfg.literal_cap);
}

double intensity_factor(std::uint8_t cell_intensity, const CostConfig& cfg) {
  if (cell_intensity > cfg.w_th) return cfg.high_intensity_weight;
  if (cell_intensity > cfg.v_th) return 1.0;
  return 0.0;
}

double point_cost(const CylindricalPoint& p, const OccupancyGridIndex& index,
                  const CostConfig& cfg) {
  const auto hit = index.locate(p);
  if (!hit) return 0.0;
  return height_restrainer(p.z, hit->height, cfg) *
         intensity_factor(hit->cell.intensity, cfg);
}

CostReport total_cost(const std::vector<Point3>& cloud, const Extrinsics& e,
                      const OccupancyGridIndex& index, const CostConfig& cfg) {
  cfg.validate();
  if (cloud.empty()) {
    throw std::invalid_argument("total_cost: empty point cloud");
  }

  const Eigen::Matrix3d R = to_rotation_matrix(e);
  const Eigen::Vector3d t(e.t_x, e.t_y, e.t_z);

  CostReport report;
  report.points_evaluated = cloud.size();
  report.height_variant = cfg.height_variant;

  std::size_t indicator_hits = 0;
  CompensatedSum height_sum;
  CompensatedSum weighted_sum;
  for (const Point3& p : cloud) {
    const Eigen::Vector3d q = R * Eigen::Vector3d(p.x, p.y, p.z) + t;
    const CylindricalPoint c = to_cylindrical(Point3{q.x(), q.y(), q.z()});
    const auto hit = index.locate(c);
    if (!hit) continue;
    ++indicator_hits;
    const double hfac = height_restrainer(c.z, hit->height, cfg);
    const double m = hfac * intensity_factor(hit->cell.intensity, cfg);
    height_sum.add(hfac);
    weighted_sum.add(m);
    if (m > 0.0) ++report.hit_count;
  }

  report.sum_indicator = static_cast<double>(indicator_hits);
  report.sum_height = height_sum.value();
  report.sum_weighted = weighted_sum.value();
  report.total = report.sum_weighted;
  return report;
}

}  // namespace lrcal
