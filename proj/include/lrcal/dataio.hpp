#pragma once

#include "lrcal/cost.hpp"
#include "lrcal/geometry.hpp"
#include "lrcal/optimizer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lrcal {

struct FrameMeta {
  std::string frame_id;
  std::int64_t timestamp_us = 0;
  double speed_mps = 0.0;
};

// One LiDAR/radar frame pair; gt_extrinsics_path may be empty.
struct FramePair {
  std::string lidar_cloud_path;
  std::string radar_scan_path;
  std::string radar_metadata_path;
  std::string gt_extrinsics_path;
};

struct Manifest {
  std::vector<FramePair> pairs;
  double max_range_m = 100.0;
  std::optional<CostConfig> cost;
  std::optional<OptimizerConfig> optimizer;
};

struct LoadedCloud {
  std::vector<Point3> points;
  std::size_t rejected_rows = 0;  // rows dropped for non-finite coordinates
};

// Reads a point cloud from either
//  - CSV with an "x,y,z" or "x,y,z,intensity" header, or
//  - little-endian float32 binary records (extension != .csv) whose layout
//    comes from a sidecar "<path>.json": {"fields_per_point": 3|4}.
// Non-finite rows are dropped and counted; a cloud with zero remaining
// points is a FormatError.
LoadedCloud load_point_cloud(const std::string& path);

void save_point_cloud_csv(const std::vector<Point3>& points,
                          const std::string& path);
void save_point_cloud_binary(const std::vector<Point3>& points,
                             const std::string& path, int fields_per_point = 3);

// CSV with header "frame_id,timestamp_us,speed_mps"; timestamps must be
// strictly increasing.
std::vector<FrameMeta> load_frame_metadata_csv(const std::string& path);

// A frame is stationary when it and the preceding window-1 frames all move
// slower than v_max. Fewer frames than the window yields an empty result.
std::vector<std::string> select_stationary(const std::vector<FrameMeta>& frames,
                                           double v_max = 0.05, int window = 5);

struct TimestampPair {
  std::size_t radar_index = 0;
  std::size_t lidar_index = 0;
  std::int64_t dt_us = 0;  // lidar timestamp - radar timestamp
};

// For each radar frame, the LiDAR frame minimizing |dt|; an exact tie
// resolves to the earlier LiDAR frame. Both inputs must be non-empty and
// sorted by timestamp.
std::vector<TimestampPair> pair_by_timestamp(
    const std::vector<FrameMeta>& lidar_frames,
    const std::vector<FrameMeta>& radar_frames);

}  // namespace lrcal
