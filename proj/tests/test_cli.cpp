#include "lrcal/cli_ops.hpp"

#include "lrcal/error.hpp"
#include "lrcal/json_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace lrcal;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lrcal_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Small scene/sensor setup so CLI-level tests stay fast.
void write_tiny_scene_config(const fs::path& path, int pairs = 1) {
  std::ofstream out(path);
  out << R"({
  "pairs": )"
      << pairs << R"(,
  "lidar": {"channels": 41, "fov_min_deg": -3, "fov_max_deg": 3,
            "azimuth_step_deg": 1.0, "max_range_m": 120},
  "radar": {"azimuth_bins": 400, "range_bins": 1100,
            "range_resolution_m": 0.0438, "azimuth_resolution_deg": 0.9,
            "vertical_beamwidth_deg": 1.8},
  "max_range_m": 48.0
})";
}

}  // namespace

TEST_CASE("synth writes a complete deterministic dataset") {
  const fs::path dir = fresh_dir("synth");
  write_tiny_scene_config(dir / "scene.json");
  save_extrinsics(Extrinsics{1.0, -0.5, 2.0, 0.1, -0.2, 0.1},
                  (dir / "gt_in.json").string());

  SynthOptions opt;
  opt.scene_config_path = (dir / "scene.json").string();
  opt.gt_extrinsics_path = (dir / "gt_in.json").string();
  opt.out_dir = (dir / "data").string();
  opt.seed = 7;
  const std::string manifest_path = cmd_synth(opt);
  CHECK(manifest_path == (dir / "data" / "manifest.json").string());

  const Manifest m = load_manifest(manifest_path);
  REQUIRE(m.pairs.size() == 1);
  CHECK(fs::exists(m.pairs[0].lidar_cloud_path));
  CHECK(fs::exists(m.pairs[0].radar_scan_path));
  CHECK(fs::exists(m.pairs[0].radar_metadata_path));
  CHECK(fs::exists(m.pairs[0].gt_extrinsics_path));
  CHECK(m.max_range_m == 48.0);

  SUBCASE("same seed reproduces identical bytes") {
    opt.out_dir = (dir / "data2").string();
    cmd_synth(opt);
    for (const char* f :
         {"manifest.json", "gt.json", "pair_000/cloud.csv", "pair_000/radar.pgm",
          "pair_000/radar_meta.json"}) {
      CHECK(slurp(dir / "data" / f) == slurp(dir / "data2" / f));
    }
  }

  SUBCASE("three-pair config yields three pairs") {
    write_tiny_scene_config(dir / "scene3.json", 3);
    SynthOptions opt3 = opt;
    opt3.scene_config_path = (dir / "scene3.json").string();
    opt3.out_dir = (dir / "data3").string();
    const Manifest m3 = load_manifest(cmd_synth(opt3));
    CHECK(m3.pairs.size() == 3);
    for (const auto& p : m3.pairs) CHECK(fs::exists(p.lidar_cloud_path));
  }

  SUBCASE("ground truth outside the optimizer bounds is refused") {
    save_extrinsics(Extrinsics{0, 0, 11.0, 0, 0, 0}, (dir / "bad_gt.json").string());
    SynthOptions bad = opt;
    bad.gt_extrinsics_path = (dir / "bad_gt.json").string();
    bad.out_dir = (dir / "never").string();
    CHECK_THROWS_AS(cmd_synth(bad), std::invalid_argument);
  }
}

TEST_CASE("calibrate command round trip") {
  const fs::path dir = fresh_dir("calibrate");
  write_tiny_scene_config(dir / "scene.json");
  const Extrinsics gt{1.5, -0.8, 2.5, 0.15, -0.25, 0.2};
  save_extrinsics(gt, (dir / "gt_in.json").string());

  SynthOptions sopt;
  sopt.scene_config_path = (dir / "scene.json").string();
  sopt.gt_extrinsics_path = (dir / "gt_in.json").string();
  sopt.out_dir = (dir / "data").string();
  sopt.seed = 3;
  const std::string manifest_path = cmd_synth(sopt);

  CalibrateOptions copt;
  copt.manifest_path = manifest_path;
  copt.out_path = (dir / "result.json").string();
  copt.seed = 5;
  copt.restarts = 0;
  copt.init_extrinsics_path = (dir / "data" / "gt.json").string();
  const OptimizationResult r = cmd_calibrate(copt);

  SUBCASE("starting at the ground truth stays within one step") {
    const OptimizerConfig ocfg;
    const Vector6 x = to_vector(r.extrinsics);
    const Vector6 g = to_vector(gt);
    for (int k = 0; k < 6; ++k) {
      const double step =
          ocfg.relative_steps[static_cast<std::size_t>(k)] *
          std::max(std::abs(g[k]), kFiniteDifferenceFloor[static_cast<std::size_t>(k)]);
      CHECK(std::abs(x[k] - g[k]) <= step + 1e-12);
    }
  }

  SUBCASE("result file re-evaluates to the reported cost") {
    const OptimizationResult loaded =
        load_optimization_result((dir / "result.json").string());
    CHECK(loaded.final_cost == doctest::Approx(r.final_cost));
    CHECK(to_vector(loaded.extrinsics) == to_vector(r.extrinsics));
    REQUIRE(!loaded.trace.empty());
    CHECK(loaded.trace.back().cost == doctest::Approx(loaded.final_cost));

    const Manifest m = load_manifest(manifest_path);
    const CostConfig ccfg;
    double expect = 0.0;
    for (const FramePair& pair : m.pairs) {
      RadarScan scan = load_radar_scan(pair.radar_scan_path, pair.radar_metadata_path);
      scan = crop_range(scan, m.max_range_m);
      const OccupancyGridIndex grid = build_grid(scan, ccfg.v_th);
      expect += total_cost(load_point_cloud(pair.lidar_cloud_path).points,
                           loaded.extrinsics, grid, ccfg)
                    .total;
    }
    CHECK(loaded.final_cost == doctest::Approx(expect).epsilon(1e-12));
  }

  SUBCASE("fixed seed reproduces identical result files") {
    CalibrateOptions again = copt;
    again.out_path = (dir / "result2.json").string();
    cmd_calibrate(again);
    CHECK(slurp(dir / "result.json") == slurp(dir / "result2.json"));
  }
}

TEST_CASE("cost sweep produces the documented row counts") {
  const fs::path dir = fresh_dir("sweep");
  write_tiny_scene_config(dir / "scene.json");
  SynthOptions sopt;
  sopt.scene_config_path = (dir / "scene.json").string();
  sopt.out_dir = (dir / "data").string();
  const std::string manifest_path = cmd_synth(sopt);

  CostSweepOptions opt;
  opt.manifest_path = manifest_path;
  opt.out_csv = (dir / "rot.csv").string();
  opt.axis = 2;
  cmd_cost_sweep(opt);

  std::ifstream in(dir / "rot.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "displacement,cost");
  int rows = 0;
  double prev = -1e9;
  double max_cost = -1.0, max_disp = 0.0;
  while (std::getline(in, line)) {
    ++rows;
    const auto comma = line.find(',');
    const double disp = std::stod(line.substr(0, comma));
    const double cost = std::stod(line.substr(comma + 1));
    CHECK(disp > prev);
    prev = disp;
    if (cost > max_cost) {
      max_cost = cost;
      max_disp = disp;
    }
  }
  CHECK(rows == 101);
  // Identity center: the synthetic ground truth here IS the identity, so
  // the peak must sit at displacement zero (within one step).
  CHECK(std::abs(max_disp) <= 0.1 + 1e-12);

  CostSweepOptions tr = opt;
  tr.axis = 4;
  tr.out_csv = (dir / "tr.csv").string();
  cmd_cost_sweep(tr);
  std::ifstream in2(dir / "tr.csv");
  int rows2 = -1;  // header
  while (std::getline(in2, line)) ++rows2;
  CHECK(rows2 == 81);
}

TEST_CASE("eval summarizes errors against the ground truth") {
  const fs::path dir = fresh_dir("eval");
  const Extrinsics gt{1.0, 2.0, 3.0, 0.1, 0.2, 0.3};
  save_extrinsics(gt, (dir / "gt.json").string());

  const auto write_result = [&](const std::string& name, const Extrinsics& e) {
    OptimizationResult r;
    r.extrinsics = e;
    r.final_cost = 10.0;
    r.iterations = 1;
    r.converged = true;
    save_optimization_result(r, (dir / name).string());
  };

  SUBCASE("single result equal to gt") {
    write_result("result_0.json", gt);
    EvalOptions opt;
    opt.results = {(dir / "result_0.json").string()};
    opt.gt_path = (dir / "gt.json").string();
    opt.out_path = (dir / "report.json").string();
    const EvalReport rep = cmd_eval(opt);
    CHECK(rep.runs == 1);
    for (int k = 0; k < 6; ++k) {
      CHECK(rep.mean[static_cast<std::size_t>(k)] == 0.0);
      CHECK(rep.stddev[static_cast<std::size_t>(k)] == 0.0);
    }
  }

  SUBCASE("two symmetric results: zero mean, std equal to the offset") {
    Extrinsics a = gt, b = gt;
    a.theta_z_deg += 0.4;
    b.theta_z_deg -= 0.4;
    a.t_y += 0.05;
    b.t_y -= 0.05;
    write_result("result_a.json", a);
    write_result("result_b.json", b);
    EvalOptions opt;
    opt.results = {(dir / "result_*.json").string()};
    opt.gt_path = (dir / "gt.json").string();
    const EvalReport rep = cmd_eval(opt);
    CHECK(rep.runs == 2);
    CHECK(rep.mean[2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.stddev[2] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(rep.stddev[4] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(rep.stddev[0] == 0.0);
  }

  SUBCASE("matches an independent two-pass computation on many results") {
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> off(-0.5, 0.5);
    std::vector<std::array<double, 6>> errs;
    for (int i = 0; i < 100; ++i) {
      Extrinsics e = gt;
      std::array<double, 6> err{};
      err[0] = off(rng);
      err[3] = off(rng);
      e.theta_x_deg += err[0];
      e.t_x += err[3];
      errs.push_back(err);
      char name[40];
      std::snprintf(name, sizeof(name), "run_%03d.json", i);
      write_result(name, e);
    }
    EvalOptions opt;
    opt.results = {(dir / "run_*.json").string()};
    opt.gt_path = (dir / "gt.json").string();
    const EvalReport rep = cmd_eval(opt);
    REQUIRE(rep.runs == 100);
    for (const std::size_t k : {std::size_t{0}, std::size_t{3}}) {
      double mean = 0.0;
      for (const auto& e : errs) mean += e[k];
      mean /= 100.0;
      double var = 0.0;
      for (const auto& e : errs) var += (e[k] - mean) * (e[k] - mean);
      const double stddev = std::sqrt(var / 100.0);
      CHECK(rep.mean[k] == doctest::Approx(mean).epsilon(1e-9));
      CHECK(rep.stddev[k] == doctest::Approx(stddev).epsilon(1e-9));
    }
  }

  SUBCASE("missing ground truth is an error") {
    write_result("result_0.json", gt);
    EvalOptions opt;
    opt.results = {(dir / "result_0.json").string()};
    opt.gt_path = (dir / "nope.json").string();
    CHECK_THROWS(cmd_eval(opt));
  }
}

TEST_CASE("run_app argument handling and exit codes") {
  const fs::path dir = fresh_dir("app");

  SUBCASE("unknown subcommand") {
    CHECK(run_app({"frobnicate"}) == 1);
  }

  SUBCASE("missing required flag") {
    CHECK(run_app({"calibrate"}) == 1);
  }

  SUBCASE("bad manifest path returns an input error") {
    CHECK(run_app({"calibrate", "--manifest", (dir / "nope.json").string(),
                   "--out", (dir / "r.json").string()}) == 1);
  }

  SUBCASE("synth then calibrate end to end") {
    write_tiny_scene_config(dir / "scene.json");
    CHECK(run_app({"synth", "--config", (dir / "scene.json").string(), "--out",
                   (dir / "data").string(), "--seed", "9"}) == 0);
    CHECK(run_app({"calibrate", "--manifest",
                   (dir / "data" / "manifest.json").string(), "--out",
                   (dir / "result.json").string(), "--restarts", "0", "--init",
                   (dir / "data" / "gt.json").string()}) == 0);
    CHECK(run_app({"eval", "--results", (dir / "result.json").string(), "--gt",
                   (dir / "data" / "gt.json").string(), "--out",
                   (dir / "report.json").string()}) == 0);

    // Schema stability of the emitted documents.
    const auto result = nlohmann::json::parse(slurp(dir / "result.json"));
    for (const char* key :
         {"extrinsics", "final_cost", "iterations", "converged",
          "attempt_index", "trace"}) {
      CHECK(result.contains(key));
    }
    CHECK(result["extrinsics"].contains("rotation_deg"));
    CHECK(result["extrinsics"]["rotation_order"] == "ZYX");
    REQUIRE(result["trace"].is_array());
    REQUIRE(!result["trace"].empty());
    CHECK(result["trace"][0].contains("x"));
    CHECK(result["trace"][0].contains("cost"));

    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    for (const char* key : {"runs", "files", "errors", "mean", "std"}) {
      CHECK(report.contains(key));
    }
    for (const char* name : kParameterNames) {
      CHECK(report["mean"].contains(name));
      CHECK(report["std"].contains(name));
    }

    const auto manifest = nlohmann::json::parse(slurp(dir / "data" / "manifest.json"));
    CHECK(manifest.contains("pairs"));
    CHECK(manifest["pairs"][0].contains("lidar"));
    CHECK(manifest["pairs"][0].contains("radar"));
    CHECK(manifest["pairs"][0].contains("radar_meta"));
    CHECK(manifest.contains("max_range_m"));
  }

  SUBCASE("help exits cleanly") {
    CHECK(run_app({"--help"}) == 0);
  }
}
