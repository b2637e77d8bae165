#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "collapse/network_sim.hpp"
#include "collapse/theory.hpp"

namespace collapse {

/// Config schema (JSON):
///
///   {
///     "n": 3,
///     "bank": {"means": [[-5], [5]], "covariance": [[1]]},
///     "a": 1.0, "L": 3, "beta": 0.5, "T": 200,
///     "epsilon": 1e-6, "schedule_rule": "reciprocal-k", "seed": 1,
///     "initial_pool": [[0.5], [-1.2]], "exact_renormalize": false
///   }
///
/// For d = 1 the means may be plain numbers and the covariance a scalar.
/// "bank": {"random_means": {"count": 11, "min_gap": 8, "seed": 3},
/// "covariance": 1} generates scalar means with well_separated_means().
/// Missing keys keep the SimConfig defaults; unknown keys are rejected.
SimConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimConfig& config);
SimConfig load_config(const std::filesystem::path& path);

nlohmann::json trajectory_to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const nlohmann::json& j);

/// Compact, deterministic rendering used for trajectory files.
std::string dump_trajectory(const Trajectory& trajectory);

/// Columns t, frobenius_norm, pool_size, synthetic_fraction, k_t. The
/// synthetic fraction is left blank while the pool is empty.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

nlohmann::json report_to_json(const ContractionReport& report);

}  // namespace collapse
