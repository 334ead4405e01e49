#pragma once

#include "lrcal/dataio.hpp"
#include "lrcal/geometry.hpp"
#include "lrcal/optimizer.hpp"

#include <string>

namespace lrcal {

// Extrinsics document:
//   {"rotation_deg": [tx, ty, tz], "translation_m": [x, y, z],
//    "rotation_order": "ZYX"}
// Readers reject any rotation_order other than "ZYX".
Extrinsics extrinsics_from_json(const std::string& text);
std::string extrinsics_to_json(const Extrinsics& e);
Extrinsics load_extrinsics(const std::string& path);
void save_extrinsics(const Extrinsics& e, const std::string& path);

// CostConfig document:
//   {"v_th": 50, "w_th": 80, "high_intensity_weight": 1.5,
//    "height_variant": "center_peaked"|"literal", "literal_cap": 1e6}
CostConfig cost_config_from_json(const std::string& text);
std::string cost_config_to_json(const CostConfig& cfg);

// OptimizerConfig document mirroring the struct fields.
OptimizerConfig optimizer_config_from_json(const std::string& text);
std::string optimizer_config_to_json(const OptimizerConfig& cfg);

// Manifest document:
//   {"pairs": [{"lidar":..., "radar":..., "radar_meta":..., "gt":...}],
//    "max_range_m": 100.0, "cost": {...}, "optimizer": {...}}
// "gt", "cost" and "optimizer" are optional. Relative paths inside the
// manifest are resolved against the manifest's directory on load.
Manifest load_manifest(const std::string& path);
void save_manifest(const Manifest& m, const std::string& path);

// OptimizationResult document including the full trace.
std::string optimization_result_to_json(const OptimizationResult& r);
OptimizationResult optimization_result_from_json(const std::string& text);
void save_optimization_result(const OptimizationResult& r, const std::string& path);
OptimizationResult load_optimization_result(const std::string& path);

}  // namespace lrcal
