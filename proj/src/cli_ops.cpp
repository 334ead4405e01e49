#include "lrcal/cli_ops.hpp"

#include "lrcal/error.hpp"
#include "lrcal/json_io.hpp"
#include "lrcal/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

namespace lrcal {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::exception& e) {
    throw FormatError(path + ": invalid JSON: " + e.what());
  }
}

struct SceneConfig {
  Scene scene = canonical_scene();
  LidarModel lidar = LidarModel::uniform(128, -20.0, 20.0);
  RadarModel radar;
  int pairs = 1;
  double max_range_m = 100.0;
};

Scene scene_from_json(const json& j, const std::string& context) {
  Scene s;
  for (const json& wj : j.value("walls", json::array())) {
    Wall w;
    w.x0 = wj.at("x0").get<double>();
    w.y0 = wj.at("y0").get<double>();
    w.x1 = wj.at("x1").get<double>();
    w.y1 = wj.at("y1").get<double>();
    w.z_min = wj.at("z_min").get<double>();
    w.z_max = wj.at("z_max").get<double>();
    w.reflectivity = static_cast<std::uint8_t>(wj.value("reflectivity", 200));
    w.lidar_visible = wj.value("lidar_visible", true);
    s.walls.push_back(w);
  }
  for (const json& cj : j.value("cylinders", json::array())) {
    Cylinder c;
    c.x = cj.at("x").get<double>();
    c.y = cj.at("y").get<double>();
    c.radius = cj.at("radius").get<double>();
    c.z_min = cj.at("z_min").get<double>();
    c.z_max = cj.at("z_max").get<double>();
    c.reflectivity = static_cast<std::uint8_t>(cj.value("reflectivity", 200));
    c.lidar_visible = cj.value("lidar_visible", true);
    s.cylinders.push_back(c);
  }
  if (s.walls.empty() && s.cylinders.empty()) {
    throw FormatError(context + ": scene has no primitives");
  }
  return s;
}

SceneConfig scene_config_from_file(const std::string& path) {
  SceneConfig cfg;
  if (path.empty()) return cfg;
  const json j = read_json_file(path);
  if (j.contains("scene") && !j["scene"].is_string()) {
    cfg.scene = scene_from_json(j["scene"], path);
  } else if (j.contains("scene") && j["scene"].get<std::string>() != "canonical") {
    throw FormatError(path + ": field 'scene' must be \"canonical\" or an object");
  }
  if (j.contains("lidar")) {
    const json& lj = j["lidar"];
    if (lj.contains("elevation_deg")) {
      cfg.lidar.elevation_deg = lj["elevation_deg"].get<std::vector<double>>();
      std::sort(cfg.lidar.elevation_deg.begin(), cfg.lidar.elevation_deg.end());
    } else {
      cfg.lidar = LidarModel::uniform(lj.value("channels", 128),
                                      lj.value("fov_min_deg", -20.0),
                                      lj.value("fov_max_deg", 20.0));
    }
    cfg.lidar.azimuth_step_deg = lj.value("azimuth_step_deg", 0.5);
    cfg.lidar.max_range_m = lj.value("max_range_m", 120.0);
    cfg.lidar.range_noise_std_m = lj.value("range_noise_std_m", 0.0);
  }
  if (j.contains("radar")) {
    const json& rj = j["radar"];
    cfg.radar.azimuth_bins = rj.value("azimuth_bins", 400);
    cfg.radar.range_bins = rj.value("range_bins", 2283);
    cfg.radar.range_resolution_m = rj.value("range_resolution_m", 0.0438);
    cfg.radar.azimuth_resolution_deg = rj.value("azimuth_resolution_deg", 0.9);
    cfg.radar.vertical_beamwidth_deg = rj.value("vertical_beamwidth_deg", 1.8);
    cfg.radar.noise_floor = static_cast<std::uint8_t>(rj.value("noise_floor", 0));
  }
  cfg.pairs = j.value("pairs", 1);
  if (cfg.pairs < 1) throw FormatError(path + ": field 'pairs' must be >= 1");
  cfg.max_range_m = j.value("max_range_m", 100.0);
  return cfg;
}

// Per-pair scene variation: rotate the whole scene about the origin and
// jitter the poles, so multiple pairs constrain the solution from
// different azimuths.
Scene vary_scene(const Scene& base, int pair_index, std::uint64_t seed) {
  if (pair_index == 0) return base;
  const double yaw = deg2rad(75.0 * pair_index);
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(pair_index));
  const auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  Scene out = base;
  const auto rot = [&](double& x, double& y) {
    const double nx = c * x - s * y;
    const double ny = s * x + c * y;
    x = nx;
    y = ny;
  };
  for (Wall& w : out.walls) {
    rot(w.x0, w.y0);
    rot(w.x1, w.y1);
  }
  for (Cylinder& cy : out.cylinders) {
    rot(cy.x, cy.y);
    cy.x += uniform(-1.5, 1.5);
    cy.y += uniform(-1.5, 1.5);
  }
  return out;
}

struct FrameData {
  std::vector<std::vector<Point3>> clouds;
  std::vector<OccupancyGridIndex> grids;
  CostConfig cost;
  OptimizerConfig optimizer;
};

FrameData load_frame_data(const Manifest& manifest, const std::string& config_path) {
  FrameData data;
  data.cost = manifest.cost.value_or(CostConfig{});
  data.optimizer = manifest.optimizer.value_or(OptimizerConfig{});
  if (!config_path.empty()) {
    const json j = read_json_file(config_path);
    if (j.contains("cost")) {
      data.cost = cost_config_from_json(j["cost"].dump());
    }
    if (j.contains("optimizer")) {
      data.optimizer = optimizer_config_from_json(j["optimizer"].dump());
    }
  }
  data.cost.validate();
  data.optimizer.validate();
  for (const FramePair& pair : manifest.pairs) {
    data.clouds.push_back(load_point_cloud(pair.lidar_cloud_path).points);
    RadarScan scan = load_radar_scan(pair.radar_scan_path, pair.radar_metadata_path);
    scan = crop_range(scan, manifest.max_range_m);
    data.grids.push_back(build_grid(scan, data.cost.v_th));
  }
  return data;
}

std::vector<std::string> expand_result_paths(const std::vector<std::string>& inputs) {
  std::vector<std::string> out;
  for (const std::string& arg : inputs) {
    if (arg.find('*') == std::string::npos) {
      out.push_back(arg);
      continue;
    }
    const fs::path pattern(arg);
    const fs::path dir =
        pattern.parent_path().empty() ? fs::path(".") : pattern.parent_path();
    const std::string name = pattern.filename().string();
    const auto star = name.find('*');
    const std::string prefix = name.substr(0, star);
    const std::string suffix = name.substr(star + 1);
    std::vector<std::string> matches;
    if (fs::is_directory(dir)) {
      for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string f = entry.path().filename().string();
        if (f.size() >= prefix.size() + suffix.size() &&
            f.compare(0, prefix.size(), prefix) == 0 &&
            f.compare(f.size() - suffix.size(), suffix.size(), suffix) == 0) {
          matches.push_back(entry.path().string());
        }
      }
    }
    std::sort(matches.begin(), matches.end());
    out.insert(out.end(), matches.begin(), matches.end());
  }
  if (out.empty()) {
    throw std::invalid_argument("no result files matched the given paths");
  }
  return out;
}

}  // namespace

std::string cmd_synth(const SynthOptions& opt) {
  if (opt.out_dir.empty()) throw std::invalid_argument("synth: missing output directory");
  const SceneConfig cfg = scene_config_from_file(opt.scene_config_path);
  const Extrinsics gt = opt.gt_extrinsics_path.empty()
                            ? Extrinsics::identity()
                            : load_extrinsics(opt.gt_extrinsics_path);

  const OptimizerConfig bounds_cfg;
  const Vector6 v = to_vector(gt);
  const Vector6 lo = bounds_cfg.lower_bounds();
  const Vector6 hi = bounds_cfg.upper_bounds();
  for (int k = 0; k < 6; ++k) {
    if (v[k] < lo[k] || v[k] > hi[k]) {
      throw std::invalid_argument(
          std::string("synth: ground truth outside optimizer bounds at ") +
          kParameterNames[static_cast<std::size_t>(k)]);
    }
  }

  fs::create_directories(opt.out_dir);
  const fs::path out_dir(opt.out_dir);

  Manifest manifest;
  manifest.max_range_m = cfg.max_range_m;
  for (int i = 0; i < cfg.pairs; ++i) {
    const Scene scene = vary_scene(cfg.scene, i, opt.seed);
    const SensorPair pair =
        generate_pair(scene, cfg.lidar, cfg.radar, gt,
                      opt.seed + static_cast<std::uint64_t>(i) * 7919ULL);

    char name[32];
    std::snprintf(name, sizeof(name), "pair_%03d", i);
    const fs::path pair_dir = out_dir / name;
    fs::create_directories(pair_dir);
    save_point_cloud_csv(pair.cloud, (pair_dir / "cloud.csv").string());
    save_radar_pgm(pair.scan, (pair_dir / "radar.pgm").string());
    save_radar_metadata(pair.scan, (pair_dir / "radar_meta.json").string());

    FramePair fp;
    fp.lidar_cloud_path = std::string(name) + "/cloud.csv";
    fp.radar_scan_path = std::string(name) + "/radar.pgm";
    fp.radar_metadata_path = std::string(name) + "/radar_meta.json";
    fp.gt_extrinsics_path = "gt.json";
    manifest.pairs.push_back(std::move(fp));
  }

  save_extrinsics(gt, (out_dir / "gt.json").string());
  const std::string manifest_path = (out_dir / "manifest.json").string();
  save_manifest(manifest, manifest_path);
  return manifest_path;
}

OptimizationResult cmd_calibrate(const CalibrateOptions& opt) {
  const Manifest manifest = load_manifest(opt.manifest_path);
  FrameData data = load_frame_data(manifest, opt.config_path);
  if (opt.restarts >= 0) data.optimizer.restarts = opt.restarts;
  const Extrinsics x0 = opt.init_extrinsics_path.empty()
                            ? Extrinsics::identity()
                            : load_extrinsics(opt.init_extrinsics_path);

  const OptimizationResult result = calibrate_multistart(
      data.clouds, data.grids, data.optimizer, data.cost, opt.seed, x0);
  if (!opt.out_path.empty()) {
    save_optimization_result(result, opt.out_path);
  }
  return result;
}

void cmd_cost_sweep(const CostSweepOptions& opt) {
  if (opt.axis < 0 || opt.axis > 5) {
    throw std::invalid_argument("cost-sweep: axis index must be in [0, 5]");
  }
  const bool rotation_axis = opt.axis < 3;
  const double half_range =
      opt.half_range > 0.0 ? opt.half_range : (rotation_axis ? 5.0 : 2.0);
  const double step = opt.step > 0.0 ? opt.step : (rotation_axis ? 0.1 : 0.05);
  if (!(step > 0.0)) throw std::invalid_argument("cost-sweep: step must be > 0");

  const Manifest manifest = load_manifest(opt.manifest_path);
  const FrameData data = load_frame_data(manifest, opt.config_path);
  const Extrinsics center = opt.center_extrinsics_path.empty()
                                ? Extrinsics::identity()
                                : load_extrinsics(opt.center_extrinsics_path);

  std::ofstream out(opt.out_csv);
  if (!out) throw FormatError(opt.out_csv + ": cannot open file for writing");
  out << "displacement,cost\n";
  const int n = static_cast<int>(std::round(half_range / step));
  const Vector6 v0 = to_vector(center);
  char line[80];
  for (int k = -n; k <= n; ++k) {
    const double disp = k * step;
    Vector6 v = v0;
    v[opt.axis] += disp;
    const Extrinsics e = extrinsics_from_vector(v);
    double cost = 0.0;
    for (std::size_t i = 0; i < data.clouds.size(); ++i) {
      cost += total_cost(data.clouds[i], e, data.grids[i], data.cost).total;
    }
    std::snprintf(line, sizeof(line), "%.10g,%.10g\n", disp, cost);
    out << line;
  }
  if (!out) throw FormatError(opt.out_csv + ": write failed");
}

EvalReport cmd_eval(const EvalOptions& opt) {
  if (opt.gt_path.empty()) throw std::invalid_argument("eval: missing ground truth path");
  const Extrinsics gt = load_extrinsics(opt.gt_path);
  const std::vector<std::string> files = expand_result_paths(opt.results);

  EvalReport report;
  report.runs = files.size();
  const Vector6 gt_v = to_vector(gt);
  for (const std::string& f : files) {
    const OptimizationResult r = load_optimization_result(f);
    const Vector6 err = to_vector(r.extrinsics) - gt_v;
    std::array<double, 6> e;
    for (int k = 0; k < 6; ++k) e[static_cast<std::size_t>(k)] = err[k];
    report.errors.push_back(e);
  }
  for (std::size_t k = 0; k < 6; ++k) {
    double sum = 0.0;
    for (const auto& e : report.errors) sum += e[k];
    report.mean[k] = sum / static_cast<double>(report.runs);
    double var = 0.0;
    for (const auto& e : report.errors) {
      const double d = e[k] - report.mean[k];
      var += d * d;
    }
    report.stddev[k] = std::sqrt(var / static_cast<double>(report.runs));
  }

  if (!opt.out_path.empty()) {
    json errors = json::array();
    for (const auto& e : report.errors) {
      json ej;
      for (std::size_t k = 0; k < 6; ++k) ej[kParameterNames[k]] = e[k];
      errors.push_back(std::move(ej));
    }
    json mean_j, std_j;
    for (std::size_t k = 0; k < 6; ++k) {
      mean_j[kParameterNames[k]] = report.mean[k];
      std_j[kParameterNames[k]] = report.stddev[k];
    }
    const json j{{"runs", report.runs},
                 {"files", files},
                 {"errors", std::move(errors)},
                 {"mean", std::move(mean_j)},
                 {"std", std::move(std_j)}};
    std::ofstream out(opt.out_path);
    if (!out) throw FormatError(opt.out_path + ": cannot open file for writing");
    out << j.dump(2) << "\n";
  }
  return report;
}

int run_app(const std::vector<std::string>& args) {
  CLI::App app{"LiDAR to 2D scanning radar extrinsic calibration"};
  app.require_subcommand(1);

  SynthOptions synth_opt;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic LiDAR/radar dataset with known extrinsics");
  synth->add_option("--config", synth_opt.scene_config_path,
                    "Scene configuration JSON (default: canonical scene)");
  synth->add_option("--gt", synth_opt.gt_extrinsics_path,
                    "Ground-truth extrinsics JSON (default: identity)");
  synth->add_option("--out", synth_opt.out_dir, "Output directory")->required();
  synth->add_option("--seed", synth_opt.seed, "Random seed");

  CalibrateOptions cal_opt;
  CLI::App* cal = app.add_subcommand("calibrate",
                                     "Estimate extrinsics from a dataset manifest");
  cal->add_option("--manifest", cal_opt.manifest_path, "Manifest JSON")->required();
  cal->add_option("--out", cal_opt.out_path, "Result JSON path")->required();
  cal->add_option("--seed", cal_opt.seed, "Random seed for the restarts");
  cal->add_option("--restarts", cal_opt.restarts,
                  "Number of random restarts (default: from config)");
  cal->add_option("--init", cal_opt.init_extrinsics_path,
                  "Initial extrinsics JSON (default: identity)");
  cal->add_option("--config", cal_opt.config_path,
                  "JSON with 'cost'/'optimizer' overrides");

  CostSweepOptions sweep_opt;
  std::string axis_name = "theta_z_deg";
  CLI::App* sweep = app.add_subcommand(
      "cost-sweep", "Evaluate the cost along one displaced parameter axis");
  sweep->add_option("--manifest", sweep_opt.manifest_path, "Manifest JSON")->required();
  sweep->add_option("--out", sweep_opt.out_csv, "Output CSV path")->required();
  sweep->add_option("--center", sweep_opt.center_extrinsics_path,
                    "Sweep center extrinsics JSON (default: identity)");
  sweep
      ->add_option("--axis", axis_name, "Parameter axis to sweep")
      ->check(CLI::IsMember(std::vector<std::string>(kParameterNames.begin(),
                                                     kParameterNames.end())));
  sweep->add_option("--range", sweep_opt.half_range,
                    "Half range (default: 5 deg rotations, 2 m translations)");
  sweep->add_option("--step", sweep_opt.step,
                    "Step (default: 0.1 deg rotations, 0.05 m translations)");
  sweep->add_option("--config", sweep_opt.config_path,
                    "JSON with 'cost'/'optimizer' overrides");

  EvalOptions eval_opt;
  CLI::App* eval = app.add_subcommand(
      "eval", "Summarize estimation errors of result files against ground truth");
  eval->add_option("--results", eval_opt.results,
                   "Result JSON paths (patterns with '*' allowed)")
      ->required();
  eval->add_option("--gt", eval_opt.gt_path, "Ground-truth extrinsics JSON")->required();
  eval->add_option("--out", eval_opt.out_path, "Report JSON path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      const std::string manifest = cmd_synth(synth_opt);
      std::cout << "wrote " << manifest << "\n";
    } else if (*cal) {
      const OptimizationResult r = cmd_calibrate(cal_opt);
      const Vector6 v = to_vector(r.extrinsics);
      std::cout << "phi = " << r.final_cost << ", attempt " << r.attempt_index
                << ", iterations " << r.iterations
                << (r.converged ? "" : " (not converged)") << "\n";
      for (std::size_t k = 0; k < 6; ++k) {
        std::cout << "  " << kParameterNames[k] << " = " << v[static_cast<int>(k)]
                  << "\n";
      }
    } else if (*sweep) {
      for (std::size_t k = 0; k < 6; ++k) {
        if (axis_name == kParameterNames[k]) sweep_opt.axis = static_cast<int>(k);
      }
      cmd_cost_sweep(sweep_opt);
    } else if (*eval) {
      cmd_eval(eval_opt);
    }
  } catch (const OptimizationError& e) {
    std::cerr << "optimization aborted: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace lrcal
