#pragma once

#include <Eigen/Core>

#include <vector>

namespace lrcal {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Cylindrical coordinates: r >= 0, theta in [0, 2*pi), z unchanged.
struct CylindricalPoint {
  double r = 0.0;
  double theta = 0.0;
  double z = 0.0;
};

// Six extrinsic parameters of the LiDAR-to-radar rigid transform.
// Angles are stored in degrees at the interface and converted to radians
// in exactly one place (to_rotation_matrix). The rotation composes as
// R = Rz(theta_z) * Ry(theta_y) * Rx(theta_x), i.e. yaw * pitch * roll
// about fixed axes.
struct Extrinsics {
  double theta_x_deg = 0.0;
  double theta_y_deg = 0.0;
  double theta_z_deg = 0.0;
  double t_x = 0.0;
  double t_y = 0.0;
  double t_z = 0.0;

  static Extrinsics identity() { return {}; }
};

using Vector6 = Eigen::Matrix<double, 6, 1>;

double deg2rad(double deg);
double rad2deg(double rad);

// Parameter vector ordering (theta_x, theta_y, theta_z, t_x, t_y, t_z),
// angles in degrees.
Vector6 to_vector(const Extrinsics& e);
Extrinsics extrinsics_from_vector(const Vector6& v);

Eigen::Matrix3d to_rotation_matrix(const Extrinsics& e);

Point3 transform_point(const Point3& p, const Extrinsics& e);

// theta = atan2(y, x) wrapped into [0, 2*pi); a point on the z-axis gets
// theta = 0 by convention.
CylindricalPoint to_cylindrical(const Point3& p);

// Element-wise transform_point followed by to_cylindrical, order
// preserved. Throws std::invalid_argument on an empty cloud.
std::vector<CylindricalPoint> transform_cloud(const std::vector<Point3>& cloud,
                                              const Extrinsics& e);

}  // namespace lrcal
