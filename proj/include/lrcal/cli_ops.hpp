#pragma once

#include "lrcal/dataio.hpp"
#include "lrcal/geometry.hpp"
#include "lrcal/optimizer.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace lrcal {

// Parameter order everywhere: (theta_x, theta_y, theta_z, t_x, t_y, t_z),
// angles in degrees, translations in meters.
inline constexpr std::array<const char*, 6> kParameterNames{
    "theta_x_deg", "theta_y_deg", "theta_z_deg", "t_x_m", "t_y_m", "t_z_m"};

struct SynthOptions {
  std::string scene_config_path;   // empty: canonical scene, 1 pair
  std::string gt_extrinsics_path;  // empty: identity
  std::string out_dir;
  std::uint64_t seed = 0;
};

// Renders the configured scene into out_dir (cloud CSV, radar PGM + JSON
// metadata, ground-truth extrinsics, manifest) and returns the manifest
// path. Refuses a ground truth outside the optimizer bounds.
std::string cmd_synth(const SynthOptions& opt);

struct CalibrateOptions {
  std::string manifest_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int restarts = -1;  // <0: take the value from the config
  std::string init_extrinsics_path;  // empty: start from identity
  std::string config_path;           // optional {"cost":..., "optimizer":...}
};

// Multi-start calibration over all manifest pairs; writes the winning
// result (with trace) as JSON and returns it.
OptimizationResult cmd_calibrate(const CalibrateOptions& opt);

struct CostSweepOptions {
  std::string manifest_path;
  std::string out_csv;
  std::string center_extrinsics_path;  // empty: identity
  int axis = 2;                        // index into kParameterNames
  double half_range = -1.0;  // <0: 5 deg for rotations, 2 m for translations
  double step = -1.0;        // <0: 0.1 deg for rotations, 0.05 m for translations
  std::string config_path;
};

// Evaluates the summed cost along one displaced axis and writes a
// "displacement,cost" CSV sorted by displacement.
void cmd_cost_sweep(const CostSweepOptions& opt);

struct EvalReport {
  std::size_t runs = 0;
  std::vector<std::array<double, 6>> errors;  // estimate - GT, per run
  std::array<double, 6> mean{};
  std::array<double, 6> stddev{};  // population standard deviation
};

struct EvalOptions {
  std::vector<std::string> results;  // paths, or patterns containing '*'
  std::string gt_path;
  std::string out_path;  // empty: don't write, just return
};

EvalReport cmd_eval(const EvalOptions& opt);

// Full command-line front end ("synth", "calibrate", "cost-sweep", "eval").
// Returns the process exit code: 0 success, 1 input or validation error,
// 2 optimization aborted.
int run_app(const std::vector<std::string>& args);

}  // namespace lrcal
