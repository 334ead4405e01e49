#include "lrcal/geometry.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lrcal {

double deg2rad(double deg) { return deg * (std::numbers::pi / 180.0); }
double rad2deg(double rad) { return rad * (180.0 / std::numbers::pi); }

Vector6 to_vector(const Extrinsics& e) {
  Vector6 v;
  v << e.theta_x_deg, e.theta_y_deg, e.theta_z_deg, e.t_x, e.t_y, e.t_z;
  return v;
}

Extrinsics extrinsics_from_vector(const Vector6& v) {
  return Extrinsics{v[0], v[1], v[2], v[3], v[4], v[5]};
}

Eigen::Matrix3d to_rotation_matrix(const Extrinsics& e) {
  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  return (AngleAxisd(deg2rad(e.theta_z_deg), Vector3d::UnitZ()) *
          AngleAxisd(deg2rad(e.theta_y_deg), Vector3d::UnitY()) *
          AngleAxisd(deg2rad(e.theta_x_deg), Vector3d::UnitX()))
      .toRotationMatrix();
}

namespace {

Point3 apply_rigid(const Eigen::Matrix3d& R, const Eigen::Vector3d& t,
                   const Point3& p) {
  const Eigen::Vector3d q = R * Eigen::Vector3d(p.x, p.y, p.z) + t;
  return Point3{q.x(), q.y(), q.z()};
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_azimuth(double theta) {
  if (theta < 0.0) theta += kTwoPi;
  // Guard against -eps + 2*pi rounding up to exactly 2*pi.
  if (theta >= kTwoPi) theta -= kTwoPi;
  return theta;
}

CylindricalPoint cylindrical_of(double x, double y, double z) {
  const double r = std::hypot(x, y);
  if (r == 0.0) return CylindricalPoint{0.0, 0.0, z};
  return CylindricalPoint{r, wrap_azimuth(std::atan2(y, x)), z};
}

}  // namespace

Point3 transform_point(const Point3& p, const Extrinsics& e) {
  return apply_rigid(to_rotation_matrix(e), Eigen::Vector3d(e.t_x, e.t_y, e.t_z),
                     p);
}

CylindricalPoint to_cylindrical(const Point3& p) {
  return cylindrical_of(p.x, p.y, p.z);
}

std::vector<CylindricalPoint> transform_cloud(const std::vector<Point3>& cloud,
                                              const Extrinsics& e) {
  if (cloud.empty()) {
    throw std::invalid_argument("transform_cloud: empty point cloud");
  }
  const Eigen::Matrix3d R = to_rotation_matrix(e);
  const Eigen::Vector3d t(e.t_x, e.t_y, e.t_z);
  std::vector<CylindricalPoint> out;
  out.reserve(cloud.size());
  for (const Point3& p : cloud) {
    const Point3 q = apply_rigid(R, t, p);
    out.push_back(cylindrical_of(q.x, q.y, q.z));
  }
  return out;
}

}  // namespace lrcal
