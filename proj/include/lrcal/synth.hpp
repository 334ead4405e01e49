#pragma once

#include "lrcal/geometry.hpp"
#include "lrcal/radar_grid.hpp"

#include <cstdint>
#include <vector>

namespace lrcal {

// Vertical planar wall: an XY segment extruded over a height interval.
struct Wall {
  double x0 = 0.0, y0 = 0.0;
  double x1 = 0.0, y1 = 0.0;
  double z_min = 0.0, z_max = 0.0;
  std::uint8_t reflectivity = 0;
  bool lidar_visible = true;
};

// Vertical cylinder (side surface only).
struct Cylinder {
  double x = 0.0, y = 0.0;
  double radius = 0.0;
  double z_min = 0.0, z_max = 0.0;
  std::uint8_t reflectivity = 0;
  bool lidar_visible = true;
};

struct Scene {
  std::vector<Wall> walls;
  std::vector<Cylinder> cylinders;
};

// Courtyard test scene: four slanted walls 28-45 m out plus six poles,
// with reflectivities spanning both intensity bands.
Scene canonical_scene();

struct LidarModel {
  std::vector<double> elevation_deg;  // sorted channel elevations
  double azimuth_step_deg = 0.5;
  double max_range_m = 120.0;
  double range_noise_std_m = 0.0;

  static LidarModel uniform(int channels, double fov_min_deg, double fov_max_deg,
                            double azimuth_step_deg = 0.5,
                            double max_range_m = 120.0,
                            double range_noise_std_m = 0.0);
};

struct RadarModel {
  int azimuth_bins = 400;
  int range_bins = 2283;
  double range_resolution_m = 0.0438;
  double azimuth_resolution_deg = 0.9;
  double vertical_beamwidth_deg = 1.8;
  std::uint8_t noise_floor = 0;
};

// Casts one ray per (channel, azimuth) from the posed sensor and returns
// the nearest visible intersection within max range, in the sensor frame.
// sensor_pose maps sensor coordinates into the world frame. The seed feeds
// the additive range noise (unused when range_noise_std_m == 0).
std::vector<Point3> render_lidar(const Scene& scene, const LidarModel& lidar,
                                 const Extrinsics& sensor_pose,
                                 std::uint64_t seed = 0);

// Paints every primitive crossing each beam wedge into the polar grid
// (max reflectivity wins); bins without a return hold the noise floor.
// A primitive completely outside the vertical cone at its range does not
// contribute. Only planar sensor poses (yaw + translation) are supported;
// tilted poses throw std::invalid_argument.
RadarScan render_radar(const Scene& scene, const RadarModel& radar,
                       const Extrinsics& sensor_pose);

struct SensorPair {
  std::vector<Point3> cloud;  // LiDAR frame
  RadarScan scan;
  Extrinsics gt;  // LiDAR-to-radar transform
};

// Renders the radar at the origin and the LiDAR posed at gt in the radar
// frame, so that transforming the cloud by gt aligns it with the scan.
SensorPair generate_pair(const Scene& scene, const LidarModel& lidar,
                         const RadarModel& radar, const Extrinsics& gt,
                         std::uint64_t seed);

}  // namespace lrcal
