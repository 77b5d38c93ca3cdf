// SPDX-License-Identifier: Apache-2.0

#include "risfuse/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "risfuse/geometry.hpp"
#include "risfuse/rng.hpp"

namespace risfuse {

namespace {

using nlohmann::json;

Index ceil_div(long long a, Index b) {
  return static_cast<Index>((a + b - 1) / b);
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void maybe_vec3(const json& j, const char* key, Eigen::Vector3d& out) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 3) throw std::invalid_argument(std::string("config: ") + key + " needs 3 entries");
  out = Eigen::Vector3d(v[0], v[1], v[2]);
}

void maybe_vec2(const json& j, const char* key, Eigen::Vector2d& out) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 2) throw std::invalid_argument(std::string("config: ") + key + " needs 2 entries");
  out = Eigen::Vector2d(v[0], v[1]);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (experiment != "pd_vs_n" && experiment != "pd_vs_rician" && experiment != "roc" &&
      experiment != "optimize_only")
    throw std::invalid_argument("config: unknown experiment '" + experiment + "'");
  if (n_sensors < 1 || ris_rows < 1 || ris_cols < 1 || n_fc_antennas < 1)
    throw std::invalid_argument("config: layout counts must be >= 1");
  if (!(sensor_pd >= 0.0 && sensor_pd <= 1.0 && sensor_pf >= 0.0 && sensor_pf <= 1.0 &&
        sensor_pd >= sensor_pf))
    throw std::invalid_argument("config: sensor probabilities need 0 <= pf <= pd <= 1");
  if (!(sensor_alpha > 0.0)) throw std::invalid_argument("config: alpha must be > 0");
  if (!(target_pf0 > 0.0 && target_pf0 < 1.0))
    throw std::invalid_argument("config: target_pf0 must lie in (0, 1)");
  if (trials_h0 < 1 || trials_h1 < 1 || noise_draws_per_channel < 1)
    throw std::invalid_argument("config: trial counts must be >= 1");
  if (rician_db_min > rician_db_max)
    throw std::invalid_argument("config: rician_db_min must be <= rician_db_max");
  if (opt_max_iter < 1 || opt_restarts < 1 || !(opt_rel_tol > 0.0))
    throw std::invalid_argument("config: optimizer settings invalid");
  if (layout_realizations < 1)
    throw std::invalid_argument("config: layout_realizations must be >= 1");
  if (output_format != "csv" && output_format != "json")
    throw std::invalid_argument("config: output format must be csv or json");
  if (rules.empty() || ris_modes.empty())
    throw std::invalid_argument("config: rules and ris_modes must be non-empty");
}

void apply_json(ExperimentConfig& c, const json& j) {
  maybe(j, "experiment", c.experiment);
  maybe(j, "seed", c.seed);
  maybe(j, "threads", c.threads);
  maybe(j, "target_pf0", c.target_pf0);
  maybe(j, "layout_realizations", c.layout_realizations);

  if (j.contains("layout")) {
    const json& l = j.at("layout");
    maybe(l, "n_sensors", c.n_sensors);
    maybe_vec2(l, "field_min", c.field_min);
    maybe_vec2(l, "field_max", c.field_max);
    maybe_vec3(l, "ris_position", c.ris_position);
    maybe_vec3(l, "fc_position", c.fc_position);
    maybe(l, "ris_rows", c.ris_rows);
    maybe(l, "ris_cols", c.ris_cols);
    maybe(l, "n_fc_antennas", c.n_fc_antennas);
  }
  if (j.contains("sensors")) {
    const json& s = j.at("sensors");
    maybe(s, "pd", c.sensor_pd);
    maybe(s, "pf", c.sensor_pf);
    maybe(s, "alpha", c.sensor_alpha);
  }
  if (j.contains("channel")) {
    const json& ch = j.at("channel");
    maybe(ch, "mu_db", c.mu_db);
    maybe(ch, "d0_m", c.d0_m);
    maybe(ch, "nu_direct", c.nu_direct);
    maybe(ch, "nu_ris", c.nu_ris);
    maybe(ch, "sigma_w2_dbm", c.sigma_w2_dbm);
    maybe(ch, "rician_db_min", c.rician_db_min);
    maybe(ch, "rician_db_max", c.rician_db_max);
    if (ch.contains("ris_fc_rician_db") && !ch.at("ris_fc_rician_db").is_null())
      c.ris_fc_rician_db = ch.at("ris_fc_rician_db").get<double>();
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    maybe(s, "n_antennas", c.n_antennas_sweep);
    maybe(s, "rician_db", c.rician_db_sweep);
    maybe(s, "target_pf0_grid", c.target_pf0_grid);
  }
  if (j.contains("rules")) {
    c.rules.clear();
    for (const auto& name : j.at("rules")) c.rules.push_back(rule_from_string(name.get<std::string>()));
  }
  if (j.contains("ris_modes")) {
    c.ris_modes.clear();
    for (const auto& name : j.at("ris_modes"))
      c.ris_modes.push_back(ris_mode_from_string(name.get<std::string>()));
  }
  if (j.contains("trials")) {
    const json& t = j.at("trials");
    maybe(t, "h0", c.trials_h0);
    maybe(t, "h1", c.trials_h1);
    maybe(t, "noise_draws_per_channel", c.noise_draws_per_channel);
  }
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    maybe(o, "max_iter", c.opt_max_iter);
    maybe(o, "rel_tol", c.opt_rel_tol);
    maybe(o, "restarts", c.opt_restarts);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    maybe(o, "path", c.output_path);
    maybe(o, "format", c.output_format);
  }
}

json to_json(const ExperimentConfig& c) {
  json rules = json::array();
  for (const Rule r : c.rules) rules.push_back(to_string(r));
  json modes = json::array();
  for (const RisMode m : c.ris_modes) modes.push_back(to_string(m));
  return json{
      {"experiment", c.experiment},
      {"seed", c.seed},
      {"threads", c.threads},
      {"target_pf0", c.target_pf0},
      {"layout_realizations", c.layout_realizations},
      {"layout",
       {{"n_sensors", c.n_sensors},
        {"field_min", {c.field_min.x(), c.field_min.y()}},
        {"field_max", {c.field_max.x(), c.field_max.y()}},
        {"ris_position", {c.ris_position.x(), c.ris_position.y(), c.ris_position.z()}},
        {"fc_position", {c.fc_position.x(), c.fc_position.y(), c.fc_position.z()}},
        {"ris_rows", c.ris_rows},
        {"ris_cols", c.ris_cols},
        {"n_fc_antennas", c.n_fc_antennas}}},
      {"sensors", {{"pd", c.sensor_pd}, {"pf", c.sensor_pf}, {"alpha", c.sensor_alpha}}},
      {"channel",
       {{"mu_db", c.mu_db},
        {"d0_m", c.d0_m},
        {"nu_direct", c.nu_direct},
        {"nu_ris", c.nu_ris},
        {"sigma_w2_dbm", c.sigma_w2_dbm},
        {"rician_db_min", c.rician_db_min},
        {"rician_db_max", c.rician_db_max},
        {"ris_fc_rician_db",
         c.ris_fc_rician_db ? json(*c.ris_fc_rician_db) : json(nullptr)}}},
      {"sweep",
       {{"n_antennas", c.n_antennas_sweep},
        {"rician_db", c.rician_db_sweep},
        {"target_pf0_grid", c.target_pf0_grid}}},
      {"rules", rules},
      {"ris_modes", modes},
      {"trials",
       {{"h0", c.trials_h0},
        {"h1", c.trials_h1},
        {"noise_draws_per_channel", c.noise_draws_per_channel}}},
      {"optimizer",
       {{"max_iter", c.opt_max_iter}, {"rel_tol", c.opt_rel_tol}, {"restarts", c.opt_restarts}}},
      {"output", {{"path", c.output_path}, {"format", c.output_format}}},
  };
}

namespace {

/// Long-term state drawn once per (seed, realization) and held fixed across a
/// sweep: sensor positions, Rician factors, the random RIS baseline and the
/// long-term phase design.
struct LongTermScenario {
  NetworkLayout<double> layout;  // n_fc_antennas is overwritten per point
  SteeringAngles<double> angles;
  PathGains<double> gains;
  FadingParams<double> fading;
  SensorModel<double> sensors;
  RisPhases<double> theta_random;
  RisPhases<double> theta_designed;
  MmTrace<double> design_trace;
};

LongTermScenario make_long_term(const ExperimentConfig& c, std::uint64_t realization) {
  LongTermScenario lt;

  lt.layout.sensor_positions.resize(c.n_sensors, 3);
  {
    auto rng = make_stream(c.seed, {stream::kLayout, realization});
    std::uniform_real_distribution<double> ux(c.field_min.x(), c.field_max.x());
    std::uniform_real_distribution<double> uy(c.field_min.y(), c.field_max.y());
    for (Index k = 0; k < c.n_sensors; ++k) {
      const double x = ux(rng);
      const double y = uy(rng);
      lt.layout.sensor_positions.row(k) << x, y, 0.0;
    }
  }
  lt.layout.ris_position = c.ris_position;
  lt.layout.fc_position = c.fc_position;
  lt.layout.ris_rows = c.ris_rows;
  lt.layout.ris_cols = c.ris_cols;
  lt.layout.n_fc_antennas = c.n_fc_antennas;
  lt.layout.validate();

  lt.angles = compute_angles(lt.layout);
  lt.gains = compute_path_gains(lt.layout, db_to_linear(c.mu_db), c.d0_m, c.nu_ris, c.nu_direct);

  {
    auto rng = make_stream(c.seed, {stream::kRicianFactors, realization});
    std::uniform_real_distribution<double> u(c.rician_db_min, c.rician_db_max);
    lt.fading.b_wr.resize(c.n_sensors);
    for (Index k = 0; k < c.n_sensors; ++k) lt.fading.b_wr[k] = rician_db_to_amplitude(u(rng));
    lt.fading.b = rician_db_to_amplitude(c.ris_fc_rician_db ? *c.ris_fc_rician_db : u(rng));
  }
  lt.fading.sigma_w2 = dbm_to_watt(c.sigma_w2_dbm);
  lt.fading.gains = lt.gains;
  lt.fading.validate();

  lt.sensors.pd = RVec<double>::Constant(c.n_sensors, c.sensor_pd);
  lt.sensors.pf = RVec<double>::Constant(c.n_sensors, c.sensor_pf);
  lt.sensors.alpha = RVec<double>::Constant(c.n_sensors, c.sensor_alpha);
  lt.sensors.validate();

  {
    auto rng = make_stream(c.seed, {stream::kRisInit, realization});
    lt.theta_random = random_ris_phases<double>(lt.layout.n_ris_elements(), rng);
  }

  // The phase design only uses M-sized LoS quantities, so any antenna count
  // works for assembling them.
  NetworkLayout<double> design_layout = lt.layout;
  design_layout.n_fc_antennas = 1;
  const LosComponents<double> los = make_los_components(design_layout, lt.angles);
  const auto inputs = build_design_inputs(los, lt.gains, lt.sensors.alpha);
  auto rng = make_stream(c.seed, {stream::kRestart, realization});
  auto [theta, trace] =
      optimize_phases_restarts(inputs, c.opt_restarts, rng, c.opt_max_iter, c.opt_rel_tol);
  lt.theta_designed = std::move(theta);
  lt.design_trace = std::move(trace);
  return lt;
}

Scenario make_scenario(const LongTermScenario& lt, Index n_antennas, const RVec<double>& b_wr,
                       double b, RisMode mode) {
  Scenario sc;
  sc.layout = lt.layout;
  sc.layout.n_fc_antennas = n_antennas;
  sc.angles = lt.angles;
  sc.los = make_los_components(sc.layout, sc.angles);
  sc.fading = lt.fading;
  sc.fading.b_wr = b_wr;
  sc.fading.b = b;
  sc.sensors = lt.sensors;
  sc.theta = (mode == RisMode::kLongTermDesign) ? lt.theta_designed : lt.theta_random;
  return sc;
}

struct PointOutcome {
  bool ok = false;
  std::string reason;
  RocPoint point;
};

PointOutcome run_point(const ExperimentConfig& c, const Scenario& scenario, Rule rule,
                       RisMode mode, double target_pf0, std::uint64_t master_seed) {
  PointOutcome out;
  if (rule == Rule::kZfc && scenario.layout.n_fc_antennas < scenario.layout.n_sensors()) {
    out.reason = "zfc requires n_antennas >= n_sensors";
    return out;
  }
  if (rule == Rule::kLlr && scenario.layout.n_sensors() > kMaxLlrSensors) {
    out.reason = "llr enumeration limited to 20 sensors";
    return out;
  }
  TrialConfig tc;
  tc.n_noise_draws_per_channel = c.noise_draws_per_channel;
  tc.n_channel_draws = ceil_div(c.trials_h0, c.noise_draws_per_channel);
  tc.n_h1_channel_draws = ceil_div(c.trials_h1, c.noise_draws_per_channel);
  tc.target_pf0 = target_pf0;
  tc.master_seed = master_seed;
  tc.rule = rule;
  tc.ris_mode = mode;
  try {
    out.point = estimate_roc_point(tc, scenario, c.threads);
    out.ok = true;
  } catch (const std::exception& e) {
    out.reason = e.what();
  }
  return out;
}

ResultRow make_row(const ExperimentConfig& c, const std::string& experiment,
                   const std::string& rule, const std::string& mode,
                   const std::string& sweep_name, double sweep_value, double target) {
  ResultRow row;
  row.experiment = experiment;
  row.rule = rule;
  row.ris_mode = mode;
  row.sweep_name = sweep_name;
  row.sweep_value = sweep_value;
  row.pf0_target = target;
  row.seed = c.seed;
  return row;
}

void fill_row(ResultRow& row, const PointOutcome& outcome) {
  if (!outcome.ok) {
    row.status = "skipped";
    row.reason = outcome.reason;
    row.pf0_achieved = std::nan("");
    row.pd0 = std::nan("");
    row.pd0_stderr = std::nan("");
    return;
  }
  const RocPoint& p = outcome.point;
  row.pf0_achieved = p.pf0_achieved;
  row.pd0 = p.pd0;
  row.pd0_stderr = p.std_err_pd0;
  row.trials_h0 = p.trials_h0;
  row.trials_h1 = p.trials_h1;
  row.pf0_stderr = p.std_err_pf0;
  row.threshold = p.threshold;
  row.failed_trials = p.failed_trials;
}

/// Combines per-realization outcomes of one sweep point: means of the
/// probability estimates, root-sum-square standard errors scaled by 1/R.
void fill_row_aggregate(ResultRow& row, const std::vector<PointOutcome>& outcomes) {
  for (const auto& o : outcomes) {
    if (!o.ok) {
      fill_row(row, o);
      return;
    }
  }
  if (outcomes.size() == 1) {
    fill_row(row, outcomes.front());
    return;
  }
  const double r = static_cast<double>(outcomes.size());
  double pf0 = 0.0, pd0 = 0.0, var_pd0 = 0.0, var_pf0 = 0.0;
  for (const auto& o : outcomes) {
    pf0 += o.point.pf0_achieved;
    pd0 += o.point.pd0;
    var_pd0 += o.point.std_err_pd0 * o.point.std_err_pd0;
    var_pf0 += o.point.std_err_pf0 * o.point.std_err_pf0;
    row.trials_h0 += o.point.trials_h0;
    row.trials_h1 += o.point.trials_h1;
    row.failed_trials += o.point.failed_trials;
  }
  row.pf0_achieved = pf0 / r;
  row.pd0 = pd0 / r;
  row.pd0_stderr = std::sqrt(var_pd0) / r;
  row.pf0_stderr = std::sqrt(var_pf0) / r;
  row.threshold = outcomes.front().point.threshold;
}

ResultRow observation_bound_reference_row(const ExperimentConfig& c, const std::string& experiment,
                                          const std::string& sweep_name) {
  const auto curve = observation_bound_curve(c.n_sensors, c.sensor_pd, c.sensor_pf);
  // Operating point closest to the target false-alarm rate (ties -> lower nu).
  const auto best = std::min_element(curve.begin(), curve.end(), [&](const auto& a, const auto& b) {
    return std::abs(a.pf0_ob - c.target_pf0) < std::abs(b.pf0_ob - c.target_pf0);
  });
  ResultRow row = make_row(c, experiment, "observation_bound", "none", sweep_name, 0.0,
                           c.target_pf0);
  row.pf0_achieved = best->pf0_ob;
  row.pd0 = best->pd0_ob;
  return row;
}

json design_extras(const LongTermScenario& lt) {
  json phases = json::array();
  for (Index i = 0; i < lt.theta_designed.theta.size(); ++i) {
    phases.push_back(std::arg(lt.theta_designed.theta[i]));
  }
  return json{{"designed_phases_rad", phases},
              {"design_final_g", lt.design_trace.g_values.back()},
              {"design_iterations", lt.design_trace.iterations},
              {"design_converged", lt.design_trace.converged}};
}

MmTraceRecord trace_record(const LongTermScenario& lt) {
  MmTraceRecord rec;
  rec.g_values = lt.design_trace.g_values;
  rec.converged = lt.design_trace.converged;
  return rec;
}

bool uses_design(const ExperimentConfig& c) {
  return std::find(c.ris_modes.begin(), c.ris_modes.end(), RisMode::kLongTermDesign) !=
         c.ris_modes.end();
}

/// Shared sweep driver: for every realization builds the long-term scenario,
/// then runs (sweep value x rule x mode) points in a fixed order; rows are
/// aggregated over realizations.
template <typename SweepValue, typename ScenarioFn>
ResultTable run_sweep(const ExperimentConfig& c, const std::string& experiment,
                      const std::string& sweep_name, const std::vector<SweepValue>& sweep,
                      ScenarioFn&& scenario_for) {
  c.validate();
  if (sweep.empty()) throw std::invalid_argument("config: empty sweep for " + experiment);

  ResultTable table;
  table.experiment = experiment;
  table.resolved_config = to_json(c);

  std::vector<ResultRow> rows;
  std::vector<std::vector<PointOutcome>> outcomes;
  for (const SweepValue value : sweep)
    for (const Rule rule : c.rules)
      for (const RisMode mode : c.ris_modes) {
        rows.push_back(make_row(c, experiment, to_string(rule), to_string(mode), sweep_name,
                                static_cast<double>(value), c.target_pf0));
        outcomes.emplace_back();
      }

  for (Index r = 0; r < c.layout_realizations; ++r) {
    const LongTermScenario lt = make_long_term(c, static_cast<std::uint64_t>(r));
    if (r == 0 && uses_design(c)) {
      table.mm_trace = trace_record(lt);
      table.extras = design_extras(lt);
    }
    std::size_t row_index = 0;
    std::uint64_t point_counter = 0;
    for (const SweepValue value : sweep)
      for (const Rule rule : c.rules)
        for (const RisMode mode : c.ris_modes) {
          const Scenario sc = scenario_for(lt, value, mode);
          const std::uint64_t master = derive_seed(
              c.seed, {stream::kPoint, static_cast<std::uint64_t>(r), point_counter++});
          outcomes[row_index++].push_back(
              run_point(c, sc, rule, mode, c.target_pf0, master));
        }
  }

  for (std::size_t i = 0; i < rows.size(); ++i) fill_row_aggregate(rows[i], outcomes[i]);
  table.rows = std::move(rows);
  table.rows.push_back(observation_bound_reference_row(c, experiment, sweep_name));
  return table;
}

}  // namespace

ResultTable run_pd_vs_n(const ExperimentConfig& config) {
  return run_sweep(config, "pd_vs_n", "n_antennas", config.n_antennas_sweep,
                   [](const LongTermScenario& lt, Index n, RisMode mode) {
                     return make_scenario(lt, n, lt.fading.b_wr, lt.fading.b, mode);
                   });
}

ResultTable run_pd_vs_rician(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  if (!c.ris_fc_rician_db) c.ris_fc_rician_db = 20.0;  // fixed RIS->FC Rician factor
  return run_sweep(c, "pd_vs_rician", "rician_db", c.rician_db_sweep,
                   [&c](const LongTermScenario& lt, double rician_db, RisMode mode) {
                     const RVec<double> b_wr = RVec<double>::Constant(
                         lt.layout.n_sensors(), rician_db_to_amplitude(rician_db));
                     return make_scenario(lt, c.n_fc_antennas, b_wr,
                                          rician_db_to_amplitude(*c.ris_fc_rician_db), mode);
                   });
}

ResultTable run_roc(const ExperimentConfig& config) {
  config.validate();
  if (config.target_pf0_grid.empty())
    throw std::invalid_argument("config: empty target_pf0 grid for roc");

  ResultTable table;
  table.experiment = "roc";
  table.resolved_config = to_json(config);

  std::vector<ResultRow> rows;
  std::vector<std::vector<PointOutcome>> outcomes;
  std::vector<bool> analytic;
  for (const double target : config.target_pf0_grid)
    for (const Rule rule : config.rules)
      for (const RisMode mode : config.ris_modes) {
        ResultRow row = make_row(config, "roc", to_string(rule), to_string(mode), "target_pf0",
                                 target, target);
        if (target >= 1.0) {
          // Degenerate operating point: every trial exceeds a -inf threshold.
          row.pf0_achieved = 1.0;
          row.pd0 = 1.0;
          analytic.push_back(true);
        } else {
          analytic.push_back(false);
        }
        rows.push_back(std::move(row));
        outcomes.emplace_back();
      }

  for (Index r = 0; r < config.layout_realizations; ++r) {
    const LongTermScenario lt = make_long_term(config, static_cast<std::uint64_t>(r));
    if (r == 0 && uses_design(config)) {
      table.mm_trace = trace_record(lt);
      table.extras = design_extras(lt);
    }
    std::size_t row_index = 0;
    std::uint64_t point_counter = 0;
    for (const double target : config.target_pf0_grid)
      for (const Rule rule : config.rules)
        for (const RisMode mode : config.ris_modes) {
          const std::size_t i = row_index++;
          const std::uint64_t master = derive_seed(
              config.seed, {stream::kPoint, static_cast<std::uint64_t>(r), point_counter++});
          if (analytic[i]) continue;
          const Scenario sc = make_scenario(lt, config.n_fc_antennas, lt.fading.b_wr,
                                            lt.fading.b, mode);
          outcomes[i].push_back(run_point(config, sc, rule, mode, target, master));
        }
  }

  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!analytic[i]) fill_row_aggregate(rows[i], outcomes[i]);
  table.rows = std::move(rows);

  for (const auto& p : observation_bound_curve(config.n_sensors, config.sensor_pd,
                                               config.sensor_pf)) {
    ResultRow row = make_row(config, "roc", "observation_bound", "none", "target_pf0", p.pf0_ob,
                             p.pf0_ob);
    row.pf0_achieved = p.pf0_ob;
    row.pd0 = p.pd0_ob;
    table.rows.push_back(std::move(row));
  }
  return table;
}

ResultTable run_optimize_only(const ExperimentConfig& config) {
  config.validate();
  ResultTable table;
  table.experiment = "optimize_only";
  table.resolved_config = to_json(config);
  const LongTermScenario lt = make_long_term(config, 0);
  table.mm_trace = trace_record(lt);
  table.extras = design_extras(lt);
  return table;
}

ResultTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.experiment == "pd_vs_n") return run_pd_vs_n(config);
  if (config.experiment == "pd_vs_rician") return run_pd_vs_rician(config);
  if (config.experiment == "roc") return run_roc(config);
  return run_optimize_only(config);
}

}  // namespace risfuse
