#pragma once

#include "lrcal/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lrcal {

enum class SweepDirection { Ccw, Cw };

// One full polar sweep of a 2D scanning radar, stored as an 8-bit
// intensity grid with rows = azimuth bins and columns = range bins.
struct RadarScan {
  int azimuth_bins = 0;
  int range_bins = 0;
  double range_resolution_m = 0.0;      // delta_r, meters per range bin
  double azimuth_resolution_deg = 0.0;  // delta_beta_h, degrees per azimuth bin
  double vertical_beamwidth_deg = 0.0;  // delta_beta_v
  double azimuth_start_deg = 0.0;       // physical angle of row 0's leading edge
  SweepDirection sweep = SweepDirection::Ccw;
  std::vector<std::uint8_t> intensities;  // row-major, azimuth_bins x range_bins

  std::uint8_t at(int azimuth_bin, int range_bin) const {
    return intensities[static_cast<std::size_t>(azimuth_bin) * range_bins +
                       range_bin];
  }
  double max_range_m() const { return range_bins * range_resolution_m; }

  // Throws FormatError if the dimensions and metadata are inconsistent
  // (grid size mismatch, azimuth bins not covering 360 degrees, ...).
  void validate() const;
};

// Reads a binary 8-bit PGM (P5) polar image plus its JSON metadata sidecar:
//   {"range_resolution_m": f, "azimuth_resolution_deg": f,
//    "vertical_beamwidth_deg": f, "azimuth_start_deg": f, "sweep": "ccw"|"cw"}
// azimuth_start_deg and sweep are optional (default 0 and "ccw").
RadarScan load_radar_scan(const std::string& polar_image_path,
                          const std::string& metadata_path);

void save_radar_pgm(const RadarScan& scan, const std::string& image_path);
void save_radar_metadata(const RadarScan& scan, const std::string& metadata_path);

// Drops range columns beyond max_range: range_bins' = floor(max_range / delta_r).
// Throws std::invalid_argument if max_range is smaller than one bin.
RadarScan crop_range(const RadarScan& scan, double max_range_m);

struct CellHeights {
  double front = 0.0;  // at the cell face nearer the sensor
  double rear = 0.0;   // at the far face
};

// Heights of the wedge cell's front and rear faces:
//   h_front = 2 * (center_r - delta_r/2) * tan(beta_v/2)
//   h_rear  = 2 * (center_r + delta_r/2) * tan(beta_v/2)
// Throws std::invalid_argument when center_r < delta_r/2 (degenerate cell)
// or beta_v is outside (0, 90) degrees.
CellHeights cell_heights(double center_r, double delta_r, double beta_v_deg);

struct OccupancyCell {
  int azimuth_bin = 0;
  int range_bin = 0;
  double center_r = 0.0;      // meters
  double center_theta = 0.0;  // radians, physical azimuth of the cell center
  std::uint8_t intensity = 0;
  double h_front = 0.0;
  double h_rear = 0.0;
};

// Dense cylindrical occupancy index over one radar scan. A cell is occupied
// iff its pixel intensity exceeds the validity threshold. Immutable after
// construction; locate() is O(1) and safe to call concurrently.
class OccupancyGridIndex {
 public:
  struct Hit {
    OccupancyCell cell;
    double height = 0.0;  // wedge height 2*r*tan(beta_v/2) at the point's radius
  };

  // Point membership. A hit requires, in order: r < max_range, the
  // (azimuth, range) bin occupied, and |z| <= r*tan(beta_v/2). The height
  // bound uses the point's own radius, which interpolates exactly between
  // the cell's front and rear face heights.
  std::optional<Hit> locate(const CylindricalPoint& p) const;

  bool occupied(int azimuth_bin, int range_bin) const;
  OccupancyCell cell_at(int azimuth_bin, int range_bin) const;

  // Reduced-resolution copy: range bins are max-pooled by range_factor and
  // the vertical beamwidth is widened by beamwidth_scale. The optimizer
  // runs its early passes against such grids, where the cost basin is wide
  // and smooth, before refining on the original index.
  OccupancyGridIndex coarsened(int range_factor, double beamwidth_scale) const;

  int azimuth_bins() const { return azimuth_bins_; }
  int range_bins() const { return range_bins_; }
  double range_resolution_m() const { return delta_r_; }
  double azimuth_resolution_deg() const { return rad2deg(delta_beta_rad_); }
  double vertical_beamwidth_deg() const { return beta_v_deg_; }
  double max_range_m() const { return max_range_; }
  std::uint8_t validity_threshold() const { return v_th_; }
  std::size_t occupied_count() const { return occupied_count_; }
  std::vector<OccupancyCell> occupied_cells() const;

 private:
  friend OccupancyGridIndex build_grid(const RadarScan& scan, std::uint8_t v_th);

  int azimuth_bins_ = 0;
  int range_bins_ = 0;
  double delta_r_ = 0.0;
  double delta_beta_rad_ = 0.0;
  double beta_v_deg_ = 0.0;
  double tan_half_beta_v_ = 0.0;
  double azimuth_start_rad_ = 0.0;
  double sweep_sign_ = 1.0;  // +1 ccw, -1 cw
  double max_range_ = 0.0;
  std::uint8_t v_th_ = 0;
  std::size_t occupied_count_ = 0;
  std::vector<std::uint8_t> intensity_;

  int azimuth_bin_of(double theta) const;
};

// One cell per pixel with intensity > v_th; bin centers sit at
// (bin + 0.5) * resolution in both range and azimuth.
OccupancyGridIndex build_grid(const RadarScan& scan, std::uint8_t v_th);

}  // namespace lrcal
