// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner: resolves a configuration against the built-in defaults,
// assembles long-term scenarios (layout, fading statistics, RIS phases) and
// sweeps the Monte Carlo engine over named experiments.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "risfuse/detect.hpp"
#include "risfuse/risopt.hpp"
#include "risfuse/types.hpp"

namespace risfuse {

/// Fully-resolved experiment description. Every field has the documented
/// default, so a config file only needs to name what it changes.
struct ExperimentConfig {
  std::string experiment = "roc";  // pd_vs_n | pd_vs_rician | roc | optimize_only
  std::uint64_t seed = 1;
  int threads = 0;  // Monte Carlo workers; 0 = all hardware threads

  // Layout: K sensors uniform in the ground square, RIS and FC fixed.
  Index n_sensors = 10;
  Eigen::Vector2d field_min{0.0, 0.0};
  Eigen::Vector2d field_max{40.0, 40.0};
  Eigen::Vector3d ris_position{40.0, 20.0, 5.0};
  Eigen::Vector3d fc_position{65.0, 40.0, 2.0};
  Index ris_rows = 5;
  Index ris_cols = 5;
  Index n_fc_antennas = 128;  // used by roc / pd_vs_rician / optimize_only

  // Local sensor model (identical sensors).
  double sensor_pd = 0.5;
  double sensor_pf = 0.05;
  double sensor_alpha = 1.0;

  // Channel statistics.
  double mu_db = -20.0;       // path-loss gain at the reference distance
  double d0_m = 1.0;          // reference distance [m]
  double nu_direct = 4.0;     // sensor -> FC exponent (obstructed)
  double nu_ris = 2.0;        // sensor -> RIS and RIS -> FC exponent
  double sigma_w2_dbm = -70.0;
  double rician_db_min = 10.0;  // per-sensor Rician factors drawn uniformly
  double rician_db_max = 20.0;
  std::optional<double> ris_fc_rician_db;  // fixed b in dB; unset = drawn

  // Sweeps.
  std::vector<Index> n_antennas_sweep{16, 32, 64, 128};
  std::vector<double> rician_db_sweep{15.0, 25.0, 35.0, 45.0};
  std::vector<double> target_pf0_grid{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};

  std::vector<Rule> rules{Rule::kLlr, Rule::kMrc, Rule::kMmrc1, Rule::kMmrc2, Rule::kZfc};
  std::vector<RisMode> ris_modes{RisMode::kRandomPhases, RisMode::kLongTermDesign};

  double target_pf0 = 0.01;
  long long trials_h0 = 200000;
  long long trials_h1 = 50000;
  Index noise_draws_per_channel = 10;

  // Phase optimizer.
  Index opt_max_iter = 500;
  double opt_rel_tol = 1e-8;
  Index opt_restarts = 10;

  Index layout_realizations = 1;  // > 1 averages operating points over layouts

  std::string output_path = "risfuse_results";
  std::string output_format = "csv";  // csv | json

  void validate() const;
};

/// Overlays a JSON document (see README for the schema) onto the defaults.
void apply_json(ExperimentConfig& config, const nlohmann::json& j);

/// Serializes the fully-resolved configuration.
nlohmann::json to_json(const ExperimentConfig& config);

/// One result record. The first twelve fields form the CSV schema; the rest
/// only appear in the JSON output.
struct ResultRow {
  std::string experiment;
  std::string rule;
  std::string ris_mode;
  std::string sweep_name;
  double sweep_value = 0.0;
  double pf0_target = 0.0;
  double pf0_achieved = 0.0;
  double pd0 = 0.0;
  double pd0_stderr = 0.0;
  long long trials_h0 = 0;
  long long trials_h1 = 0;
  std::uint64_t seed = 0;

  std::string status = "ok";  // "ok" | "skipped"
  std::string reason;
  double pf0_stderr = 0.0;
  double threshold = 0.0;
  long long failed_trials = 0;

  bool operator==(const ResultRow&) const = default;
};

/// Optimizer trace of the long-term design kept for the run.
struct MmTraceRecord {
  std::vector<double> g_values;
  bool converged = false;
};

struct ResultTable {
  std::string experiment;
  std::vector<ResultRow> rows;
  nlohmann::json resolved_config;
  nlohmann::json extras;  // experiment-specific payloads (e.g. designed phases)
  std::optional<MmTraceRecord> mm_trace;
};

ResultTable run_pd_vs_n(const ExperimentConfig& config);
ResultTable run_pd_vs_rician(const ExperimentConfig& config);
ResultTable run_roc(const ExperimentConfig& config);
ResultTable run_optimize_only(const ExperimentConfig& config);

/// Dispatch on config.experiment.
ResultTable run_experiment(const ExperimentConfig& config);

}  // namespace risfuse
