// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "risfuse/experiment.hpp"
#include "risfuse/io.hpp"

using namespace risfuse;
using nlohmann::json;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.experiment = "pd_vs_n";
  c.seed = 5;
  c.threads = 2;
  c.n_antennas_sweep = {16, 32};
  c.rules = {Rule::kMrc, Rule::kZfc};
  c.trials_h0 = 2000;
  c.trials_h1 = 1000;
  c.noise_draws_per_channel = 10;
  c.opt_restarts = 2;
  c.opt_max_iter = 60;
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::string kTmp = std::filesystem::temp_directory_path() / "risfuse_test";

}  // namespace

TEST_CASE("config: defaults match the documented setup") {
  const ExperimentConfig c;
  CHECK(c.n_sensors == 10);
  CHECK(c.ris_rows * c.ris_cols == 25);
  CHECK(c.ris_position == Eigen::Vector3d(40, 20, 5));
  CHECK(c.fc_position == Eigen::Vector3d(65, 40, 2));
  CHECK(c.sensor_pd == 0.5);
  CHECK(c.sensor_pf == 0.05);
  CHECK(c.sensor_alpha == 1.0);
  CHECK(c.mu_db == -20.0);
  CHECK(c.d0_m == 1.0);
  CHECK(c.nu_ris == 2.0);
  CHECK(c.nu_direct == 4.0);
  CHECK(c.sigma_w2_dbm == -70.0);
  CHECK(c.rician_db_min == 10.0);
  CHECK(c.rician_db_max == 20.0);
  CHECK(c.target_pf0 == 0.01);
  CHECK(c.trials_h0 == 200000);
  CHECK(c.trials_h1 == 50000);
  CHECK_FALSE(c.ris_fc_rician_db.has_value());
  CHECK(c.rules.size() == 5);
  CHECK(c.ris_modes.size() == 2);
}

TEST_CASE("config: JSON overlay only touches named fields") {
  ExperimentConfig c;
  apply_json(c, json::parse(R"({
    "experiment": "roc",
    "seed": 77,
    "layout": {"n_fc_antennas": 64},
    "channel": {"sigma_w2_dbm": -80.0},
    "rules": ["ZFC"],
    "trials": {"h0": 5000}
  })"));
  CHECK(c.experiment == "roc");
  CHECK(c.seed == 77);
  CHECK(c.n_fc_antennas == 64);
  CHECK(c.sigma_w2_dbm == -80.0);
  CHECK(c.rules.size() == 1);
  CHECK(c.rules[0] == Rule::kZfc);
  CHECK(c.trials_h0 == 5000);
  // untouched defaults survive
  CHECK(c.trials_h1 == 50000);
  CHECK(c.n_sensors == 10);
  CHECK(c.mu_db == -20.0);
}

TEST_CASE("config: resolved JSON echo round-trips") {
  ExperimentConfig c = tiny_config();
  c.ris_fc_rician_db = 18.5;
  ExperimentConfig copy;
  apply_json(copy, to_json(c));
  CHECK(to_json(copy) == to_json(c));
}

TEST_CASE("config: validation rejects bad values") {
  ExperimentConfig c;
  c.experiment = "nope";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ExperimentConfig{};
  c.target_pf0 = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ExperimentConfig{};
  c.output_format = "xml";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("run_pd_vs_n: table shape, seed echo and reference row") {
  const ExperimentConfig c = tiny_config();
  const ResultTable table = run_pd_vs_n(c);
  // 2 sweep values x 2 rules x 2 modes + the observation-bound reference.
  REQUIRE(table.rows.size() == 9);
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
    const ResultRow& r = table.rows[i];
    CHECK(r.experiment == "pd_vs_n");
    CHECK(r.sweep_name == "n_antennas");
    CHECK(r.seed == 5);
    CHECK(r.status == "ok");
    CHECK(r.pf0_target == 0.01);
    CHECK(r.pd0 >= 0.0);
    CHECK(r.pd0 <= 1.0);
    CHECK(r.trials_h0 == 2000);
    CHECK(r.trials_h1 == 1000);
  }
  const ResultRow& ref = table.rows.back();
  CHECK(ref.rule == "observation_bound");
  CHECK(ref.ris_mode == "none");
  CHECK(ref.pd0 == doctest::Approx(0.9453125).epsilon(1e-9));      // nu = 3 tail of B(10, 0.5)
  CHECK(ref.pf0_achieved == doctest::Approx(0.0115036).epsilon(1e-4));
  CHECK(table.mm_trace.has_value());
  CHECK(table.extras.contains("design_final_g"));
}

TEST_CASE("run_pd_vs_n: infeasible ZFC points are skipped with a reason") {
  ExperimentConfig c = tiny_config();
  c.n_antennas_sweep = {8};  // fewer antennas than sensors
  c.rules = {Rule::kZfc, Rule::kMrc};
  c.ris_modes = {RisMode::kRandomPhases};
  const ResultTable table = run_pd_vs_n(c);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].rule == "ZFC");
  CHECK(table.rows[0].status == "skipped");
  CHECK_FALSE(table.rows[0].reason.empty());
  CHECK(std::isnan(table.rows[0].pd0));
  CHECK(table.rows[1].rule == "MRC");
  CHECK(table.rows[1].status == "ok");
}

TEST_CASE("run_pd_vs_rician: resolves the fixed RIS-FC factor to 20 dB") {
  ExperimentConfig c = tiny_config();
  c.experiment = "pd_vs_rician";
  c.rician_db_sweep = {15.0, 45.0};
  c.n_fc_antennas = 32;
  c.rules = {Rule::kMmrc2};
  const ResultTable table = run_pd_vs_rician(c);
  REQUIRE(table.rows.size() == 2 * 2 + 1);
  CHECK(table.resolved_config.at("channel").at("ris_fc_rician_db").get<double>() == 20.0);
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i)
    CHECK(table.rows[i].sweep_name == "rician_db");
}

TEST_CASE("run_roc: monotone curve, unit target and bound rows") {
  ExperimentConfig c = tiny_config();
  c.experiment = "roc";
  c.target_pf0_grid = {0.05, 0.2, 1.0};
  c.rules = {Rule::kMrc};
  c.ris_modes = {RisMode::kRandomPhases};
  c.n_fc_antennas = 16;
  const ResultTable table = run_roc(c);
  // 3 targets x 1 rule x 1 mode + 11 bound points.
  REQUIRE(table.rows.size() == 3 + 11);

  const ResultRow& low = table.rows[0];
  const ResultRow& mid = table.rows[1];
  CHECK(low.sweep_value == 0.05);
  CHECK(mid.sweep_value == 0.2);
  // ROC monotone in the false-alarm target within Monte Carlo error.
  const double se = std::sqrt(low.pd0_stderr * low.pd0_stderr + mid.pd0_stderr * mid.pd0_stderr);
  CHECK(mid.pd0 >= low.pd0 - 3.0 * se);

  const ResultRow& unit = table.rows[2];
  CHECK(unit.sweep_value == 1.0);
  CHECK(unit.pf0_achieved == 1.0);
  CHECK(unit.pd0 == 1.0);

  int bound_rows = 0;
  for (const auto& r : table.rows)
    if (r.rule == "observation_bound") ++bound_rows;
  CHECK(bound_rows == 11);

  // Every measured point sits under the bound polyline.
  const auto curve = observation_bound_curve(c.n_sensors, c.sensor_pd, c.sensor_pf);
  for (const ResultRow* r : {&low, &mid})
    CHECK(r->pd0 <= observation_bound_pd_at(curve, r->pf0_achieved) + 2.0 * r->pd0_stderr);
}

TEST_CASE("emit_results: csv schema and round-trip through json") {
  const ExperimentConfig c = tiny_config();
  const ResultTable table = run_pd_vs_n(c);
  std::filesystem::create_directories(kTmp);
  const std::string prefix = kTmp + "/roundtrip";
  const auto files = emit_results(table, prefix, OutputFormat::kCsv);
  REQUIRE(files.size() == 3);  // json + csv + mm trace sidecar

  const std::string csv = read_file(prefix + ".csv");
  CHECK(csv.rfind("experiment,rule,ris_mode,sweep_name,sweep_value,pf0_target,pf0_achieved,"
                  "pd0,pd0_stderr,trials_h0,trials_h1,seed\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + long(table.rows.size()));

  const ResultTable back = read_results_json(prefix + ".json");
  REQUIRE(back.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) CHECK(back.rows[i] == table.rows[i]);
  CHECK(back.resolved_config == table.resolved_config);

  // Re-emitting the re-read table reproduces the CSV byte for byte.
  const auto files2 = emit_results(back, prefix + "_again", OutputFormat::kCsv);
  CHECK(read_file(prefix + "_again.csv") == csv);
}

TEST_CASE("emit_results: empty table gives a header-only csv") {
  ExperimentConfig c = tiny_config();
  c.experiment = "optimize_only";
  const ResultTable table = run_optimize_only(c);
  CHECK(table.rows.empty());
  std::filesystem::create_directories(kTmp);
  const std::string prefix = kTmp + "/empty";
  emit_results(table, prefix, OutputFormat::kCsv);
  const std::string csv = read_file(prefix + ".csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
  CHECK(read_file(prefix + "_mm_trace.csv").rfind("iteration,g\n", 0) == 0);
}

TEST_CASE("experiment reruns are byte-identical across worker counts") {
  ExperimentConfig c = tiny_config();
  c.rules = {Rule::kMmrc1};
  c.n_antennas_sweep = {16};
  c.threads = 1;
  const std::string csv_one = results_csv_string(run_pd_vs_n(c));
  c.threads = 3;
  const std::string csv_three = results_csv_string(run_pd_vs_n(c));
  CHECK(csv_one == csv_three);
}

TEST_CASE("layout averaging pools realizations") {
  ExperimentConfig c = tiny_config();
  c.rules = {Rule::kMrc};
  c.ris_modes = {RisMode::kRandomPhases};
  c.n_antennas_sweep = {16};
  c.layout_realizations = 2;
  c.trials_h0 = 1000;
  c.trials_h1 = 500;
  const ResultTable table = run_pd_vs_n(c);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].trials_h0 == 2 * 1000);
  CHECK(table.rows[0].trials_h1 == 2 * 500);
  CHECK(table.rows[0].pd0 >= 0.0);
  CHECK(table.rows[0].pd0 <= 1.0);
}
