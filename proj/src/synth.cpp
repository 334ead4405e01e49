#include "lrcal/synth.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace lrcal {

namespace {

constexpr double kRayMin = 1e-9;

struct RayHit {
  double t = std::numeric_limits<double>::infinity();
  bool valid = false;
};

// Nearest intersection of a 3D ray with the wall's vertical rectangle.
RayHit intersect_wall(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                      const Wall& w) {
  const double ex = w.x1 - w.x0;
  const double ey = w.y1 - w.y0;
  const Eigen::Vector3d normal(ey, -ex, 0.0);
  const double denom = normal.dot(dir);
  if (std::abs(denom) < 1e-12) return {};
  const Eigen::Vector3d anchor(w.x0, w.y0, 0.0);
  const double t = normal.dot(anchor - origin) / denom;
  if (t <= kRayMin) return {};
  const Eigen::Vector3d p = origin + t * dir;
  const double len2 = ex * ex + ey * ey;
  if (len2 <= 0.0) return {};
  const double s = ((p.x() - w.x0) * ex + (p.y() - w.y0) * ey) / len2;
  if (s < 0.0 || s > 1.0) return {};
  if (p.z() < w.z_min || p.z() > w.z_max) return {};
  return RayHit{t, true};
}

// Nearest intersection with the cylinder's side surface (either root may
// be the visible one when the ray starts inside).
RayHit intersect_cylinder(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                          const Cylinder& c) {
  const double ox = origin.x() - c.x;
  const double oy = origin.y() - c.y;
  const double a = dir.x() * dir.x() + dir.y() * dir.y();
  if (a < 1e-16) return {};
  const double b = 2.0 * (ox * dir.x() + oy * dir.y());
  const double cc = ox * ox + oy * oy - c.radius * c.radius;
  const double disc = b * b - 4.0 * a * cc;
  if (disc < 0.0) return {};
  const double sq = std::sqrt(disc);
  for (const double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
    if (t <= kRayMin) continue;
    const double z = origin.z() + t * dir.z();
    if (z < c.z_min || z > c.z_max) continue;
    return RayHit{t, true};
  }
  return {};
}

// XY-plane intersection from the origin; heights are handled by the caller
// via the beam-cone overlap test.
RayHit intersect_wall_2d(double dx, double dy, const Wall& w) {
  const double ex = w.x1 - w.x0;
  const double ey = w.y1 - w.y0;
  const double den = dx * ey - dy * ex;
  if (std::abs(den) < 1e-12) return {};
  const double t = (w.x0 * ey - w.y0 * ex) / den;
  if (t <= kRayMin) return {};
  const double s = (w.x0 * dy - w.y0 * dx) / den;
  if (s < 0.0 || s > 1.0) return {};
  return RayHit{t, true};
}

RayHit intersect_cylinder_2d(double dx, double dy, const Cylinder& c) {
  const double b = 2.0 * (-c.x * dx - c.y * dy);
  const double cc = c.x * c.x + c.y * c.y - c.radius * c.radius;
  const double disc = b * b - 4.0 * cc;
  if (disc < 0.0) return {};
  const double sq = std::sqrt(disc);
  for (const double t : {(-b - sq) / 2.0, (-b + sq) / 2.0}) {
    if (t > kRayMin) return RayHit{t, true};
  }
  return {};
}

double gaussian01(std::mt19937_64& rng) {
  // Box-Muller on explicitly constructed uniforms, so outputs are
  // reproducible across standard library implementations.
  const double u1 =
      (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

Scene canonical_scene() {
  Scene s;
  // Fenced courtyard. Every face's top and bottom edges sit inside the
  // radar beam wedge at its range (half-height is r * tan(0.9 deg), about
  // 0.24 m at 15 m and 0.7 m at 45 m), so the wedge overlap responds to
  // vertical shifts and tilts instead of just relabeling scanlines. A face
  // that extends far beyond the wedge would contribute a shift-invariant
  // plateau. Band centers are spread on both sides of z = 0 so no single
  // offset is preferred. The two tall poles add texture; being thin, their
  // shadows carry no weight.
  // Height bands are mirror-symmetric about z = 0 so that no weighting of
  // the faces prefers a vertical offset. Occluders must stay azimuthally
  // narrow: a wide object in front of a fence shadows the fence's band
  // asymmetrically once the sensor sits above the band centers, which
  // biases the vertical optimum.
  s.walls = {
      // Perimeter fences, 28-47 m, with clear sky at the corners.
      Wall{-24.0, 28.0, 26.0, 31.0, -0.40, 0.40, 200, true},
      Wall{36.0, -24.0, 39.0, 26.0, -0.50, 0.50, 120, true},
      Wall{-28.0, -30.0, 32.0, -33.0, -0.48, 0.48, 200, true},
      Wall{-33.0, -26.0, -30.0, 26.0, -0.45, 0.45, 120, true},
  };
  s.cylinders = {
      // Bollards near the sensor plane.
      Cylinder{10.0, 4.0, 0.40, -0.11, 0.11, 200, true},
      Cylinder{-7.0, 11.0, 0.35, -0.13, 0.13, 120, true},
      Cylinder{13.0, -9.0, 0.50, -0.15, 0.15, 200, true},
      Cylinder{-11.0, -7.0, 0.40, -0.12, 0.12, 60, true},
      // Tall poles; they span past the wedges, so they carry no height cue.
      Cylinder{4.0, 18.0, 0.35, -1.5, 4.0, 120, true},
      Cylinder{17.0, 11.0, 0.35, -1.5, 4.0, 60, true},
  };
  return s;
}

LidarModel LidarModel::uniform(int channels, double fov_min_deg,
                               double fov_max_deg, double azimuth_step_deg,
                               double max_range_m, double range_noise_std_m) {
  if (channels < 1) throw std::invalid_argument("lidar model: channels must be >= 1");
  if (!(fov_max_deg >= fov_min_deg)) {
    throw std::invalid_argument("lidar model: inverted vertical field of view");
  }
  LidarModel m;
  if (channels == 1) {
    m.elevation_deg.push_back((fov_min_deg + fov_max_deg) / 2.0);
  } else {
    for (int i = 0; i < channels; ++i) {
      m.elevation_deg.push_back(fov_min_deg + (fov_max_deg - fov_min_deg) * i /
                                                  (channels - 1));
    }
  }
  m.azimuth_step_deg = azimuth_step_deg;
  m.max_range_m = max_range_m;
  m.range_noise_std_m = range_noise_std_m;
  return m;
}

std::vector<Point3> render_lidar(const Scene& scene, const LidarModel& lidar,
                                 const Extrinsics& sensor_pose,
                                 std::uint64_t seed) {
  if (lidar.elevation_deg.empty() || !(lidar.azimuth_step_deg > 0.0) ||
      !(lidar.max_range_m > 0.0)) {
    throw std::invalid_argument("render_lidar: invalid lidar model");
  }
  const Eigen::Matrix3d R = to_rotation_matrix(sensor_pose);
  const Eigen::Vector3d origin(sensor_pose.t_x, sensor_pose.t_y, sensor_pose.t_z);
  const int azimuth_count =
      static_cast<int>(std::round(360.0 / lidar.azimuth_step_deg));
  std::mt19937_64 rng(seed);

  std::vector<Point3> cloud;
  cloud.reserve(lidar.elevation_deg.size() * static_cast<std::size_t>(azimuth_count) / 4);
  for (const double elev_deg : lidar.elevation_deg) {
    const double ce = std::cos(deg2rad(elev_deg));
    const double se = std::sin(deg2rad(elev_deg));
    for (int k = 0; k < azimuth_count; ++k) {
      const double az = deg2rad(k * lidar.azimuth_step_deg);
      const Eigen::Vector3d dir_sensor(ce * std::cos(az), ce * std::sin(az), se);
      const Eigen::Vector3d dir = R * dir_sensor;

      double nearest = lidar.max_range_m;
      bool hit = false;
      for (const Wall& w : scene.walls) {
        if (!w.lidar_visible) continue;
        const RayHit h = intersect_wall(origin, dir, w);
        if (h.valid && h.t < nearest) {
          nearest = h.t;
          hit = true;
        }
      }
      for (const Cylinder& c : scene.cylinders) {
        if (!c.lidar_visible) continue;
        const RayHit h = intersect_cylinder(origin, dir, c);
        if (h.valid && h.t < nearest) {
          nearest = h.t;
          hit = true;
        }
      }
      if (!hit) continue;
      double range = nearest;
      if (lidar.range_noise_std_m > 0.0) {
        range = std::max(kRayMin,
                         range + lidar.range_noise_std_m * gaussian01(rng));
      }
      // Points are reported in the sensor frame, so the pose cancels out.
      cloud.push_back(Point3{range * dir_sensor.x(), range * dir_sensor.y(),
                             range * dir_sensor.z()});
    }
  }
  return cloud;
}

RadarScan render_radar(const Scene& scene, const RadarModel& radar,
                       const Extrinsics& sensor_pose) {
  if (radar.azimuth_bins <= 0 || radar.range_bins <= 0 ||
      !(radar.range_resolution_m > 0.0)) {
    throw std::invalid_argument("render_radar: invalid radar model");
  }
  if (std::abs(sensor_pose.theta_x_deg) > 1e-12 ||
      std::abs(sensor_pose.theta_y_deg) > 1e-12) {
    throw std::invalid_argument(
        "render_radar: only planar sensor poses (yaw + translation) are supported");
  }

  RadarScan scan;
  scan.azimuth_bins = radar.azimuth_bins;
  scan.range_bins = radar.range_bins;
  scan.range_resolution_m = radar.range_resolution_m;
  scan.azimuth_resolution_deg = radar.azimuth_resolution_deg;
  scan.vertical_beamwidth_deg = radar.vertical_beamwidth_deg;
  scan.intensities.assign(
      static_cast<std::size_t>(radar.azimuth_bins) * radar.range_bins,
      radar.noise_floor);
  scan.validate();

  // Move the scene into the sensor frame (yaw-only poses keep the
  // primitives vertical).
  const double yaw = deg2rad(sensor_pose.theta_z_deg);
  const double cy = std::cos(-yaw);
  const double sy = std::sin(-yaw);
  const auto to_sensor_xy = [&](double x, double y) {
    const double dx = x - sensor_pose.t_x;
    const double dy = y - sensor_pose.t_y;
    return std::pair<double, double>{cy * dx - sy * dy, sy * dx + cy * dy};
  };
  Scene local = scene;
  for (Wall& w : local.walls) {
    std::tie(w.x0, w.y0) = to_sensor_xy(w.x0, w.y0);
    std::tie(w.x1, w.y1) = to_sensor_xy(w.x1, w.y1);
    w.z_min -= sensor_pose.t_z;
    w.z_max -= sensor_pose.t_z;
  }
  for (Cylinder& c : local.cylinders) {
    std::tie(c.x, c.y) = to_sensor_xy(c.x, c.y);
    c.z_min -= sensor_pose.t_z;
    c.z_max -= sensor_pose.t_z;
  }

  const double tan_half_bv = std::tan(deg2rad(radar.vertical_beamwidth_deg) / 2.0);
  const double delta_beta = deg2rad(radar.azimuth_resolution_deg);
  constexpr int kSubRays = 8;

  const auto paint = [&](int azimuth_bin, double range, double z_min, double z_max,
                         std::uint8_t reflectivity) {
    const int bin = static_cast<int>(range / radar.range_resolution_m);
    if (bin < 0 || bin >= radar.range_bins) return;
    const double half_h = range * tan_half_bv;
    if (z_min > half_h || z_max < -half_h) return;  // outside the beam cone
    auto& cell = scan.intensities[static_cast<std::size_t>(azimuth_bin) *
                                      radar.range_bins + bin];
    cell = std::max(cell, reflectivity);
  };

  for (int a = 0; a < radar.azimuth_bins; ++a) {
    for (int j = 0; j < kSubRays; ++j) {
      const double theta = (a + (j + 0.5) / kSubRays) * delta_beta;
      const double dx = std::cos(theta);
      const double dy = std::sin(theta);
      for (const Wall& w : local.walls) {
        const RayHit h = intersect_wall_2d(dx, dy, w);
        if (h.valid) paint(a, h.t, w.z_min, w.z_max, w.reflectivity);
      }
      for (const Cylinder& c : local.cylinders) {
        const RayHit h = intersect_cylinder_2d(dx, dy, c);
        if (h.valid) paint(a, h.t, c.z_min, c.z_max, c.reflectivity);
      }
    }
  }
  return scan;
}

SensorPair generate_pair(const Scene& scene, const LidarModel& lidar,
                         const RadarModel& radar, const Extrinsics& gt,
                         std::uint64_t seed) {
  SensorPair pair;
  pair.scan = render_radar(scene, radar, Extrinsics::identity());
  pair.cloud = render_lidar(scene, lidar, gt, seed);
  pair.gt = gt;
  return pair;
}

}  // namespace lrcal
