#include "lrcal/radar_grid.hpp"

#include "lrcal/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace lrcal {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void format_fail(const std::string& path, const std::string& msg) {
  throw FormatError(path + ": " + msg);
}

// Reads the next PGM header token, skipping whitespace and '#' comments.
std::string next_pgm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

}  // namespace

void RadarScan::validate() const {
  if (azimuth_bins <= 0 || range_bins <= 0) {
    throw FormatError("radar scan: non-positive grid dimensions");
  }
  if (!(range_resolution_m > 0.0)) {
    throw FormatError("radar scan: range_resolution_m must be > 0");
  }
  if (!(azimuth_resolution_deg > 0.0)) {
    throw FormatError("radar scan: azimuth_resolution_deg must be > 0");
  }
  const double coverage = azimuth_bins * azimuth_resolution_deg;
  if (std::abs(coverage - 360.0) > 1e-6) {
    std::ostringstream os;
    os << "radar scan: azimuth_bins * azimuth_resolution_deg = " << coverage
       << " deg, expected 360 (azimuth_resolution_deg)";
    throw FormatError(os.str());
  }
  if (!(vertical_beamwidth_deg > 0.0 && vertical_beamwidth_deg < 90.0)) {
    throw FormatError("radar scan: vertical_beamwidth_deg outside (0, 90)");
  }
  if (intensities.size() != static_cast<std::size_t>(azimuth_bins) * range_bins) {
    throw FormatError("radar scan: intensity grid size does not match bins");
  }
}

RadarScan load_radar_scan(const std::string& polar_image_path,
                          const std::string& metadata_path) {
  std::ifstream img(polar_image_path, std::ios::binary);
  if (!img) format_fail(polar_image_path, "cannot open file");

  const std::string magic = next_pgm_token(img);
  if (magic != "P5") {
    format_fail(polar_image_path,
                "unsupported image format '" + magic + "', expected binary PGM (P5)");
  }
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_pgm_token(img));
    height = std::stoi(next_pgm_token(img));
    maxval = std::stoi(next_pgm_token(img));
  } catch (const std::exception&) {
    format_fail(polar_image_path, "malformed PGM header");
  }
  if (width <= 0 || height <= 0) format_fail(polar_image_path, "empty image");
  if (maxval != 255) {
    format_fail(polar_image_path, "unsupported bit depth: maxval " +
                                      std::to_string(maxval) + ", expected 255 (8-bit)");
  }

  RadarScan scan;
  scan.azimuth_bins = height;  // rows = azimuth
  scan.range_bins = width;     // columns = range
  scan.intensities.resize(static_cast<std::size_t>(width) * height);
  img.read(reinterpret_cast<char*>(scan.intensities.data()),
           static_cast<std::streamsize>(scan.intensities.size()));
  if (img.gcount() != static_cast<std::streamsize>(scan.intensities.size())) {
    format_fail(polar_image_path, "truncated pixel data");
  }

  std::ifstream meta(metadata_path);
  if (!meta) format_fail(metadata_path, "cannot open file");
  nlohmann::json j;
  try {
    meta >> j;
  } catch (const nlohmann::json::exception& e) {
    format_fail(metadata_path, std::string("invalid JSON: ") + e.what());
  }
  const auto require_number = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) {
      format_fail(metadata_path, std::string("missing or non-numeric field '") +
                                     key + "'");
    }
    return j[key].get<double>();
  };
  scan.range_resolution_m = require_number("range_resolution_m");
  scan.azimuth_resolution_deg = require_number("azimuth_resolution_deg");
  scan.vertical_beamwidth_deg = require_number("vertical_beamwidth_deg");
  scan.azimuth_start_deg = j.value("azimuth_start_deg", 0.0);
  const std::string sweep = j.value("sweep", "ccw");
  if (sweep == "ccw") {
    scan.sweep = SweepDirection::Ccw;
  } else if (sweep == "cw") {
    scan.sweep = SweepDirection::Cw;
  } else {
    format_fail(metadata_path, "field 'sweep' must be \"ccw\" or \"cw\", got \"" +
                                   sweep + "\"");
  }

  try {
    scan.validate();
  } catch (const FormatError& e) {
    format_fail(metadata_path, e.what());
  }
  return scan;
}

void save_radar_pgm(const RadarScan& scan, const std::string& image_path) {
  std::ofstream out(image_path, std::ios::binary);
  if (!out) format_fail(image_path, "cannot open file for writing");
  out << "P5\n" << scan.range_bins << " " << scan.azimuth_bins << "\n255\n";
  out.write(reinterpret_cast<const char*>(scan.intensities.data()),
            static_cast<std::streamsize>(scan.intensities.size()));
  if (!out) format_fail(image_path, "write failed");
}

void save_radar_metadata(const RadarScan& scan, const std::string& metadata_path) {
  nlohmann::json j{
      {"range_resolution_m", scan.range_resolution_m},
      {"azimuth_resolution_deg", scan.azimuth_resolution_deg},
      {"vertical_beamwidth_deg", scan.vertical_beamwidth_deg},
      {"azimuth_start_deg", scan.azimuth_start_deg},
      {"sweep", scan.sweep == SweepDirection::Ccw ? "ccw" : "cw"},
  };
  std::ofstream out(metadata_path);
  if (!out) format_fail(metadata_path, "cannot open file for writing");
  out << j.dump(2) << "\n";
  if (!out) format_fail(metadata_path, "write failed");
}

RadarScan crop_range(const RadarScan& scan, double max_range_m) {
  scan.validate();
  if (!(max_range_m > 0.0)) {
    throw std::invalid_argument("crop_range: max_range must be > 0");
  }
  // The epsilon keeps exact-ratio crops (max_range an integer number of
  // bins) from losing a bin to floating-point rounding.
  const int keep = static_cast<int>(
      std::floor(max_range_m / scan.range_resolution_m + 1e-9));
  if (keep < 1) {
    throw std::invalid_argument("crop_range: max_range smaller than one range bin");
  }
  if (keep >= scan.range_bins) return scan;

  RadarScan out = scan;
  out.range_bins = keep;
  out.intensities.assign(static_cast<std::size_t>(scan.azimuth_bins) * keep, 0);
  for (int a = 0; a < scan.azimuth_bins; ++a) {
    const auto* src = &scan.intensities[static_cast<std::size_t>(a) * scan.range_bins];
    std::copy(src, src + keep,
              &out.intensities[static_cast<std::size_t>(a) * keep]);
  }
  return out;
}

CellHeights cell_heights(double center_r, double delta_r, double beta_v_deg) {
  if (!(beta_v_deg > 0.0 && beta_v_deg < 90.0)) {
    throw std::invalid_argument("cell_heights: beta_v outside (0, 90) degrees");
  }
  if (center_r < delta_r / 2.0) {
    throw std::invalid_argument("cell_heights: degenerate cell, center_r < delta_r/2");
  }
  const double tan_half = std::tan(deg2rad(beta_v_deg) / 2.0);
  return CellHeights{2.0 * (center_r - delta_r / 2.0) * tan_half,
                     2.0 * (center_r + delta_r / 2.0) * tan_half};
}

OccupancyGridIndex build_grid(const RadarScan& scan, std::uint8_t v_th) {
  scan.validate();
  OccupancyGridIndex g;
  g.azimuth_bins_ = scan.azimuth_bins;
  g.range_bins_ = scan.range_bins;
  g.delta_r_ = scan.range_resolution_m;
  g.delta_beta_rad_ = deg2rad(scan.azimuth_resolution_deg);
  g.beta_v_deg_ = scan.vertical_beamwidth_deg;
  g.tan_half_beta_v_ = std::tan(deg2rad(scan.vertical_beamwidth_deg) / 2.0);
  g.azimuth_start_rad_ = deg2rad(scan.azimuth_start_deg);
  g.sweep_sign_ = scan.sweep == SweepDirection::Ccw ? 1.0 : -1.0;
  g.max_range_ = scan.max_range_m();
  g.v_th_ = v_th;
  g.intensity_ = scan.intensities;
  for (std::uint8_t v : g.intensity_) {
    if (v > v_th) ++g.occupied_count_;
  }
  return g;
}

OccupancyGridIndex OccupancyGridIndex::coarsened(int range_factor,
                                                 double beamwidth_scale) const {
  if (range_factor < 1) {
    throw std::invalid_argument("coarsened: range_factor must be >= 1");
  }
  const double beta_v = beta_v_deg_ * beamwidth_scale;
  if (!(beta_v > 0.0 && beta_v < 90.0)) {
    throw std::invalid_argument("coarsened: scaled beamwidth outside (0, 90)");
  }
  OccupancyGridIndex g = *this;
  g.beta_v_deg_ = beta_v;
  g.tan_half_beta_v_ = std::tan(deg2rad(beta_v) / 2.0);
  if (range_factor == 1) return g;

  g.range_bins_ = (range_bins_ + range_factor - 1) / range_factor;
  g.delta_r_ = delta_r_ * range_factor;
  g.max_range_ = g.range_bins_ * g.delta_r_;
  g.intensity_.assign(static_cast<std::size_t>(azimuth_bins_) * g.range_bins_, 0);
  g.occupied_count_ = 0;
  for (int a = 0; a < azimuth_bins_; ++a) {
    for (int b = 0; b < range_bins_; ++b) {
      const std::uint8_t v =
          intensity_[static_cast<std::size_t>(a) * range_bins_ + b];
      auto& dst = g.intensity_[static_cast<std::size_t>(a) * g.range_bins_ +
                               b / range_factor];
      dst = std::max(dst, v);
    }
  }
  for (std::uint8_t v : g.intensity_) {
    if (v > g.v_th_) ++g.occupied_count_;
  }
  return g;
}

bool OccupancyGridIndex::occupied(int azimuth_bin, int range_bin) const {
  if (azimuth_bin < 0 || azimuth_bin >= azimuth_bins_ || range_bin < 0 ||
      range_bin >= range_bins_) {
    return false;
  }
  return intensity_[static_cast<std::size_t>(azimuth_bin) * range_bins_ +
                    range_bin] > v_th_;
}

OccupancyCell OccupancyGridIndex::cell_at(int azimuth_bin, int range_bin) const {
  OccupancyCell c;
  c.azimuth_bin = azimuth_bin;
  c.range_bin = range_bin;
  c.center_r = (range_bin + 0.5) * delta_r_;
  double theta = azimuth_start_rad_ + sweep_sign_ * (azimuth_bin + 0.5) * delta_beta_rad_;
  theta = std::fmod(theta, kTwoPi);
  if (theta < 0.0) theta += kTwoPi;
  if (theta >= kTwoPi) theta -= kTwoPi;
  c.center_theta = theta;
  c.intensity = intensity_[static_cast<std::size_t>(azimuth_bin) * range_bins_ +
                           range_bin];
  c.h_front = 2.0 * (c.center_r - delta_r_ / 2.0) * tan_half_beta_v_;
  c.h_rear = 2.0 * (c.center_r + delta_r_ / 2.0) * tan_half_beta_v_;
  return c;
}

int OccupancyGridIndex::azimuth_bin_of(double theta) const {
  // Grid angle: sweep progress from the start angle, in [0, 2*pi).
  double u = sweep_sign_ * (theta - azimuth_start_rad_);
  u = std::fmod(u, kTwoPi);
  if (u < 0.0) u += kTwoPi;
  int a = static_cast<int>(u / delta_beta_rad_);
  if (a >= azimuth_bins_) a = 0;  // u within one ulp of 2*pi wraps to bin 0
  return a;
}

std::optional<OccupancyGridIndex::Hit> OccupancyGridIndex::locate(
    const CylindricalPoint& p) const {
  if (!(p.r >= 0.0) || p.r >= max_range_) return std::nullopt;
  const int b = static_cast<int>(p.r / delta_r_);
  if (b >= range_bins_) return std::nullopt;
  const int a = azimuth_bin_of(p.theta);
  if (!occupied(a, b)) return std::nullopt;
  const double height = 2.0 * p.r * tan_half_beta_v_;
  if (std::abs(p.z) > height / 2.0) return std::nullopt;
  return Hit{cell_at(a, b), height};
}

std::vector<OccupancyCell> OccupancyGridIndex::occupied_cells() const {
  std::vector<OccupancyCell> cells;
  cells.reserve(occupied_count_);
  for (int a = 0; a < azimuth_bins_; ++a) {
    for (int b = 0; b < range_bins_; ++b) {
      if (occupied(a, b)) cells.push_back(cell_at(a, b));
    }
  }
  return cells;
}

}  // namespace lrcal
