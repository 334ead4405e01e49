#include "lrcal/json_io.hpp"

#include "lrcal/error.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace lrcal {

namespace {

using nlohmann::json;

json parse(const std::string& text, const std::string& context) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(context + ": invalid JSON: " + e.what());
  }
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

void write_file(const std::string& text, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot open file for writing");
  out << text;
  if (!text.empty() && text.back() != '\n') out << "\n";
  if (!out) throw FormatError(path + ": write failed");
}

Extrinsics extrinsics_from(const json& j, const std::string& context) {
  if (!j.contains("rotation_deg") || !j["rotation_deg"].is_array() ||
      j["rotation_deg"].size() != 3) {
    throw FormatError(context + ": field 'rotation_deg' must be an array of 3 numbers");
  }
  if (!j.contains("translation_m") || !j["translation_m"].is_array() ||
      j["translation_m"].size() != 3) {
    throw FormatError(context + ": field 'translation_m' must be an array of 3 numbers");
  }
  const std::string order = j.value("rotation_order", "");
  if (order != "ZYX") {
    throw FormatError(context + ": field 'rotation_order' must be \"ZYX\", got \"" +
                      order + "\"");
  }
  Extrinsics e;
  e.theta_x_deg = j["rotation_deg"][0].get<double>();
  e.theta_y_deg = j["rotation_deg"][1].get<double>();
  e.theta_z_deg = j["rotation_deg"][2].get<double>();
  e.t_x = j["translation_m"][0].get<double>();
  e.t_y = j["translation_m"][1].get<double>();
  e.t_z = j["translation_m"][2].get<double>();
  return e;
}

json extrinsics_json(const Extrinsics& e) {
  return json{
      {"rotation_deg", {e.theta_x_deg, e.theta_y_deg, e.theta_z_deg}},
      {"translation_m", {e.t_x, e.t_y, e.t_z}},
      {"rotation_order", "ZYX"},
  };
}

CostConfig cost_config_from(const json& j, const std::string& context) {
  CostConfig cfg;
  cfg.v_th = static_cast<std::uint8_t>(j.value("v_th", 50));
  cfg.w_th = static_cast<std::uint8_t>(j.value("w_th", 80));
  cfg.high_intensity_weight = j.value("high_intensity_weight", 1.5);
  cfg.literal_cap = j.value("literal_cap", 1e6);
  const std::string variant = j.value("height_variant", "center_peaked");
  if (variant == "center_peaked") {
    cfg.height_variant = HeightVariant::CenterPeaked;
  } else if (variant == "literal") {
    cfg.height_variant = HeightVariant::Literal;
  } else {
    throw FormatError(context +
                      ": field 'height_variant' must be \"center_peaked\" or "
                      "\"literal\", got \"" +
                      variant + "\"");
  }
  cfg.validate();
  return cfg;
}

json cost_config_json(const CostConfig& cfg) {
  return json{
      {"v_th", cfg.v_th},
      {"w_th", cfg.w_th},
      {"high_intensity_weight", cfg.high_intensity_weight},
      {"height_variant", cfg.height_variant == HeightVariant::CenterPeaked
                             ? "center_peaked"
                             : "literal"},
      {"literal_cap", cfg.literal_cap},
  };
}

OptimizerConfig optimizer_config_from(const json& j, const std::string& context) {
  OptimizerConfig cfg;
  cfg.bounds_rotation_deg = j.value("bounds_rotation_deg", 10.0);
  cfg.bounds_translation_m = j.value("bounds_translation_m", 2.0);
  if (j.contains("relative_steps")) {
    if (!j["relative_steps"].is_array() || j["relative_steps"].size() != 6) {
      throw FormatError(context + ": field 'relative_steps' must be an array of 6 numbers");
    }
    for (std::size_t k = 0; k < 6; ++k) {
      cfg.relative_steps[k] = j["relative_steps"][k].get<double>();
    }
  }
  cfg.termination_tol = j.value("termination_tol", 0.001);
  cfg.max_iterations = j.value("max_iterations", 200);
  cfg.restarts = j.value("restarts", 2);
  cfg.validate();
  return cfg;
}

json optimizer_config_json(const OptimizerConfig& cfg) {
  return json{
      {"bounds_rotation_deg", cfg.bounds_rotation_deg},
      {"bounds_translation_m", cfg.bounds_translation_m},
      {"relative_steps", cfg.relative_steps},
      {"termination_tol", cfg.termination_tol},
      {"max_iterations", cfg.max_iterations},
      {"restarts", cfg.restarts},
  };
}

}  // namespace

Extrinsics extrinsics_from_json(const std::string& text) {
  return extrinsics_from(parse(text, "extrinsics"), "extrinsics");
}

std::string extrinsics_to_json(const Extrinsics& e) {
  return extrinsics_json(e).dump(2);
}

Extrinsics load_extrinsics(const std::string& path) {
  return extrinsics_from(read_file(path), path);
}

void save_extrinsics(const Extrinsics& e, const std::string& path) {
  write_file(extrinsics_to_json(e), path);
}

CostConfig cost_config_from_json(const std::string& text) {
  return cost_config_from(parse(text, "cost config"), "cost config");
}

std::string cost_config_to_json(const CostConfig& cfg) {
  return cost_config_json(cfg).dump(2);
}

OptimizerConfig optimizer_config_from_json(const std::string& text) {
  return optimizer_config_from(parse(text, "optimizer config"), "optimizer config");
}

std::string optimizer_config_to_json(const OptimizerConfig& cfg) {
  return optimizer_config_json(cfg).dump(2);
}

Manifest load_manifest(const std::string& path) {
  const json j = read_file(path);
  Manifest m;
  if (!j.contains("pairs") || !j["pairs"].is_array() || j["pairs"].empty()) {
    throw FormatError(path + ": field 'pairs' must be a non-empty array");
  }
  const auto dir = std::filesystem::path(path).parent_path();
  const auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path fp(p);
    return fp.is_absolute() ? p : (dir / fp).string();
  };
  for (const json& pj : j["pairs"]) {
    FramePair fp;
    if (!pj.contains("lidar") || !pj.contains("radar") || !pj.contains("radar_meta")) {
      throw FormatError(path + ": each pair requires 'lidar', 'radar' and 'radar_meta'");
    }
    fp.lidar_cloud_path = resolve(pj["lidar"].get<std::string>());
    fp.radar_scan_path = resolve(pj["radar"].get<std::string>());
    fp.radar_metadata_path = resolve(pj["radar_meta"].get<std::string>());
    fp.gt_extrinsics_path = resolve(pj.value("gt", ""));
    for (const std::string& ref :
         {fp.lidar_cloud_path, fp.radar_scan_path, fp.radar_metadata_path,
          fp.gt_extrinsics_path}) {
      if (!ref.empty() && !std::filesystem::exists(ref)) {
        throw FormatError(path + ": referenced file does not exist: " + ref);
      }
    }
    m.pairs.push_back(std::move(fp));
  }
  m.max_range_m = j.value("max_range_m", 100.0);
  if (!(m.max_range_m > 0.0)) {
    throw FormatError(path + ": field 'max_range_m' must be > 0");
  }
  if (j.contains("cost")) m.cost = cost_config_from(j["cost"], path);
  if (j.contains("optimizer")) m.optimizer = optimizer_config_from(j["optimizer"], path);
  return m;
}

void save_manifest(const Manifest& m, const std::string& path) {
  json pairs = json::array();
  for (const FramePair& fp : m.pairs) {
    json pj{
        {"lidar", fp.lidar_cloud_path},
        {"radar", fp.radar_scan_path},
        {"radar_meta", fp.radar_metadata_path},
    };
    if (!fp.gt_extrinsics_path.empty()) pj["gt"] = fp.gt_extrinsics_path;
    pairs.push_back(std::move(pj));
  }
  json j{{"pairs", std::move(pairs)}, {"max_range_m", m.max_range_m}};
  if (m.cost) j["cost"] = cost_config_json(*m.cost);
  if (m.optimizer) j["optimizer"] = optimizer_config_json(*m.optimizer);
  write_file(j.dump(2), path);
}

std::string optimization_result_to_json(const OptimizationResult& r) {
  json trace = json::array();
  for (const TracePoint& tp : r.trace) {
    trace.push_back(json{
        {"x", {tp.x[0], tp.x[1], tp.x[2], tp.x[3], tp.x[4], tp.x[5]}},
        {"cost", tp.cost},
    });
  }
  const json j{
      {"extrinsics", extrinsics_json(r.extrinsics)},
      {"final_cost", r.final_cost},
      {"iterations", r.iterations},
      {"converged", r.converged},
      {"attempt_index", r.attempt_index},
      {"trace", std::move(trace)},
  };
  return j.dump(2);
}

OptimizationResult optimization_result_from_json(const std::string& text) {
  const json j = parse(text, "optimization result");
  OptimizationResult r;
  if (!j.contains("extrinsics")) {
    throw FormatError("optimization result: missing field 'extrinsics'");
  }
  r.extrinsics = extrinsics_from(j["extrinsics"], "optimization result");
  r.final_cost = j.value("final_cost", 0.0);
  r.iterations = j.value("iterations", 0);
  r.converged = j.value("converged", false);
  r.attempt_index = j.value("attempt_index", 0);
  if (j.contains("trace")) {
    for (const json& tj : j["trace"]) {
      TracePoint tp;
      for (int k = 0; k < 6; ++k) tp.x[k] = tj["x"][static_cast<std::size_t>(k)].get<double>();
      tp.cost = tj["cost"].get<double>();
      r.trace.push_back(tp);
    }
  }
  return r;
}

void save_optimization_result(const OptimizationResult& r, const std::string& path) {
  write_file(optimization_result_to_json(r), path);
}

OptimizationResult load_optimization_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return optimization_result_from_json(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace lrcal
