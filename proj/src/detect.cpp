// SPDX-License-Identifier: Apache-2.0

#include "risfuse/detect.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

namespace risfuse {

const char* to_string(Rule rule) {
  switch (rule) {
    case Rule::kLlr: return "LLR";
    case Rule::kMrc: return "MRC";
    case Rule::kMmrc1: return "MMRC1";
    case Rule::kMmrc2: return "MMRC2";
    case Rule::kZfc: return "ZFC";
  }
  return "?";
}

const char* to_string(RisMode mode) {
  switch (mode) {
    case RisMode::kRandomPhases: return "random_phases";
    case RisMode::kLongTermDesign: return "long_term_design";
  }
  return "?";
}

Rule rule_from_string(const std::string& name) {
  if (name == "LLR") return Rule::kLlr;
  if (name == "MRC") return Rule::kMrc;
  if (name == "MMRC1") return Rule::kMmrc1;
  if (name == "MMRC2") return Rule::kMmrc2;
  if (name == "ZFC") return Rule::kZfc;
  throw std::invalid_argument("unknown fusion rule: " + name);
}

RisMode ris_mode_from_string(const std::string& name) {
  if (name == "random_phases") return RisMode::kRandomPhases;
  if (name == "long_term_design") return RisMode::kLongTermDesign;
  throw std::invalid_argument("unknown ris mode: " + name);
}

void TrialConfig::validate() const {
  if (n_channel_draws < 1 || n_noise_draws_per_channel < 1 || n_h1_channel_draws < 1)
    throw std::invalid_argument("trial config: all trial counts must be >= 1");
  if (!(target_pf0 > 0.0 && target_pf0 < 1.0))
    throw std::invalid_argument("trial config: target_pf0 must lie in (0, 1)");
}

double calibrate_threshold(const std::vector<double>& sorted_h0_statistics, double target_pf0) {
  if (sorted_h0_statistics.empty())
    throw std::invalid_argument("calibrate_threshold: empty statistic set");
  if (!(target_pf0 > 0.0 && target_pf0 < 1.0))
    throw std::invalid_argument("calibrate_threshold: target_pf0 must lie in (0, 1)");
  if (!std::is_sorted(sorted_h0_statistics.begin(), sorted_h0_statistics.end()))
    throw std::invalid_argument("calibrate_threshold: statistics must be sorted ascending");

  const auto n = static_cast<long long>(sorted_h0_statistics.size());
  if (static_cast<double>(n) < std::ceil(10.0 / target_pf0))
    std::fprintf(stderr,
                 "risfuse: warning: %lld H0 samples is few for target_pf0 = %g "
                 "(rule of thumb: >= %.0f)\n",
                 n, target_pf0, std::ceil(10.0 / target_pf0));

  // Largest order statistic leaving at most floor(target * n) strict
  // exceedances; with the strict ">" decision the achieved rate on the
  // calibration set never exceeds the target.
  const long long allowed = static_cast<long long>(std::floor(target_pf0 * static_cast<double>(n)));
  const long long idx = std::max<long long>(0, n - allowed - 1);
  return sorted_h0_statistics[static_cast<std::size_t>(idx)];
}

ObservationBoundPoint observation_bound(Index k, double pd, double pf, Index nu) {
  if (k < 1) throw std::invalid_argument("observation_bound: k must be >= 1");
  if (nu < 0 || nu > k) throw std::invalid_argument("observation_bound: nu must lie in [0, k]");
  const auto tail = [k, nu](double p) {
    double binom = 1.0;  // C(k, 0)
    double sum = 0.0;
    for (Index i = 0; i <= k; ++i) {
      if (i >= nu)
        sum += binom * std::pow(p, double(i)) * std::pow(1.0 - p, double(k - i));
      binom *= double(k - i) / double(i + 1);
    }
    return sum;
  };
  return {nu, tail(pf), tail(pd)};
}

std::vector<ObservationBoundPoint> observation_bound_curve(Index k, double pd, double pf) {
  std::vector<ObservationBoundPoint> curve;
  curve.reserve(static_cast<std::size_t>(k) + 1);
  for (Index nu = 0; nu <= k; ++nu) curve.push_back(observation_bound(k, pd, pf, nu));
  return curve;
}

double observation_bound_pd_at(const std::vector<ObservationBoundPoint>& curve, double pf0) {
  if (curve.empty()) throw std::invalid_argument("observation bound curve is empty");
  // Polyline vertices sorted by increasing pf0, with the ideal (0, 0) corner
  // prepended (randomized counting rules realize the chords).
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  for (auto it = curve.rbegin(); it != curve.rend(); ++it) pts.emplace_back(it->pf0_ob, it->pd0_ob);
  if (pf0 <= 0.0) return 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pf0 <= pts[i].first) {
      const auto& [x0, y0] = pts[i - 1];
      const auto& [x1, y1] = pts[i];
      if (x1 == x0) return std::max(y0, y1);
      return y0 + (y1 - y0) * (pf0 - x0) / (x1 - x0);
    }
  }
  return 1.0;
}

namespace {

using Engine = std::mt19937_64;

/// Everything a noise trial needs once the channel draw is fixed. Linear
/// rules reduce to the exact projection Re(a^H y) = rx.x + sd * N(0, 1); the
/// LLR keeps the full received vector.
struct PreparedRule {
  bool linear = true;
  Eigen::RowVectorXd rx;
  double noise_sd = 0.0;
  std::optional<LlrEvaluator<double>> llr;
};

PreparedRule prepare_rule(const TrialConfig& config, const Scenario& scenario,
                          const CMat<double>& h_e, const CMat<double>& h_r,
                          const CVec<double>* mmrc2_weights) {
  PreparedRule out;
  if (config.rule == Rule::kLlr) {
    out.linear = false;
    out.llr.emplace(h_e, scenario.fading.sigma_w2, scenario.sensors);
    return out;
  }
  CVec<double> a;
  switch (config.rule) {
    case Rule::kMrc:
      a = mrc_combiner(h_e, scenario.sensors.alpha);
      break;
    case Rule::kMmrc1:
      a = mmrc_combiner(h_e, gram_v(h_r, scenario.theta, scenario.fading, scenario.los.a_ris_fc),
                        scenario.sensors.alpha);
      break;
    case Rule::kMmrc2:
      a = h_e * (*mmrc2_weights);
      break;
    case Rule::kZfc:
      a = zfc_combiner(h_e, scenario.sensors.alpha);
      break;
    case Rule::kLlr:
      break;
  }
  const CMat<double> h_alpha =
      h_e * scenario.sensors.alpha.cwiseSqrt().cast<Cplx<double>>().asDiagonal();
  out.rx = (a.adjoint() * h_alpha).real();
  out.noise_sd = std::sqrt(scenario.fading.sigma_w2 * a.squaredNorm() / 2.0);
  return out;
}

void parallel_channels(Index n, int workers, const std::function<void(Index)>& body) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (workers == 1) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const Index i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct PhaseTally {
  std::vector<long long> exceed;  // per channel: trials with statistic > threshold
  std::vector<long long> valid;   // per channel: trials that produced a statistic
  std::vector<long long> failed;  // per channel: trials lost to numerical errors
};

/// Runs one Monte Carlo phase. When `stats` is non-null the raw statistics are
/// stored (calibration); when `threshold` is non-null exceedances are counted.
void run_phase(const TrialConfig& config, const Scenario& scenario, std::uint64_t phase_tag,
               Hypothesis hypothesis, Index n_channels, const CVec<double>* mmrc2_weights,
               const double* threshold, std::vector<double>* stats, PhaseTally& tally,
               int n_workers) {
  const Index m = config.n_noise_draws_per_channel;
  const Index n_antennas = scenario.layout.n_fc_antennas;
  const double sigma_w2 = scenario.fading.sigma_w2;
  tally.exceed.assign(static_cast<std::size_t>(n_channels), 0);
  tally.valid.assign(static_cast<std::size_t>(n_channels), 0);
  tally.failed.assign(static_cast<std::size_t>(n_channels), 0);
  if (stats) stats->assign(static_cast<std::size_t>(n_channels * m),
                           std::numeric_limits<double>::quiet_NaN());

  parallel_channels(n_channels, n_workers, [&](Index c) {
    const auto cu = static_cast<std::uint64_t>(c);
    PreparedRule rule;
    try {
      ChannelRealization<double> real;
      {
        Engine eng = make_stream(config.master_seed, {phase_tag, cu, stream::kDirectChannel});
        real.h_d = draw_direct_channel(scenario.layout, scenario.fading, eng);
      }
      {
        Engine eng = make_stream(config.master_seed, {phase_tag, cu, stream::kRisChannel});
        std::tie(real.h_r, real.g) = draw_ris_channels(scenario.layout, scenario.los,
                                                       scenario.fading, eng);
      }
      const CMat<double> h_e = composite_channel(real, scenario.theta);
      rule = prepare_rule(config, scenario, h_e, real.h_r, mmrc2_weights);
    } catch (const std::runtime_error&) {
      tally.failed[static_cast<std::size_t>(c)] = m;  // singular draw: lose the whole channel
      return;
    }

    long long exceed = 0, valid = 0, failed = 0;
    for (Index j = 0; j < m; ++j) {
      const auto ju = static_cast<std::uint64_t>(j);
      Engine eng_dec = make_stream(config.master_seed, {phase_tag, cu, ju, stream::kDecisions});
      const RVec<double> x = draw_decisions(scenario.sensors, hypothesis, eng_dec);
      Engine eng_noise = make_stream(config.master_seed, {phase_tag, cu, ju, stream::kNoise});

      double statistic;
      if (rule.linear) {
        std::normal_distribution<double> std_normal(0.0, 1.0);
        statistic = rule.rx.dot(x) + rule.noise_sd * std_normal(eng_noise);
      } else {
        const CVec<double> w = draw_noise<double>(n_antennas, sigma_w2, eng_noise);
        const CVec<double> y = rule.llr->scaled_channel() * x.cast<Cplx<double>>() + w;
        statistic = (*rule.llr)(y);
      }

      if (std::isnan(statistic)) {
        ++failed;
        continue;
      }
      ++valid;
      if (stats) (*stats)[static_cast<std::size_t>(c * m + j)] = statistic;
      if (threshold && statistic > *threshold) ++exceed;
    }
    tally.exceed[static_cast<std::size_t>(c)] = exceed;
    tally.valid[static_cast<std::size_t>(c)] = valid;
    tally.failed[static_cast<std::size_t>(c)] = failed;
  });
}

long long sum(const std::vector<long long>& v) {
  long long s = 0;
  for (const long long x : v) s += x;
  return s;
}

/// Cluster-robust standard error of a pooled exceedance fraction; reduces to
/// the binomial form when each channel hosts one trial.
double cluster_std_err(const PhaseTally& tally, double p_hat) {
  const long long n_total = sum(tally.valid);
  if (n_total <= 0) return 0.0;
  long long n_clusters = 0;
  double ss = 0.0;
  for (std::size_t c = 0; c < tally.valid.size(); ++c) {
    if (tally.valid[c] <= 0) continue;
    ++n_clusters;
    const double r = static_cast<double>(tally.exceed[c]) -
                     p_hat * static_cast<double>(tally.valid[c]);
    ss += r * r;
  }
  if (n_clusters <= 1)
    return std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat) / static_cast<double>(n_total)));
  const double factor = static_cast<double>(n_clusters) / static_cast<double>(n_clusters - 1);
  return std::sqrt(factor * ss) / static_cast<double>(n_total);
}

}  // namespace

RocPoint estimate_roc_point(const TrialConfig& config, const Scenario& scenario, int n_workers) {
  config.validate();
  scenario.layout.validate();
  scenario.fading.validate();
  scenario.sensors.validate();
  scenario.theta.validate();
  const Index k = scenario.layout.n_sensors();
  if (scenario.sensors.n_sensors() != k)
    throw std::invalid_argument("estimate_roc_point: sensor model size mismatch");
  if (scenario.theta.size() != scenario.layout.n_ris_elements())
    throw std::invalid_argument("estimate_roc_point: RIS phase size mismatch");
  if (config.rule == Rule::kZfc && scenario.layout.n_fc_antennas < k)
    throw std::invalid_argument("zfc: needs at least as many antennas as sensors");
  if (config.rule == Rule::kLlr && k > kMaxLlrSensors)
    throw std::invalid_argument("llr: 2^K enumeration supports at most K = 20 sensors");

  // The expected Gram matrix is a long-term quantity: solve once.
  std::optional<CVec<double>> mmrc2_weights;
  if (config.rule == Rule::kMmrc2) {
    const CMat<double> vb = v_bar(scenario.los, scenario.theta, scenario.fading);
    const auto ldlt = detail::checked_ldlt(vb, "mmrc2");
    mmrc2_weights =
        ldlt.solve(scenario.sensors.alpha.cwiseSqrt().cwiseInverse().cast<Cplx<double>>());
  }
  const CVec<double>* weights = mmrc2_weights ? &*mmrc2_weights : nullptr;

  RocPoint point;

  // Phase 1: threshold calibration on pooled H0 statistics.
  std::vector<double> calib_stats;
  PhaseTally calib;
  run_phase(config, scenario, stream::kPhaseCalibrate, Hypothesis::kH0, config.n_channel_draws,
            weights, nullptr, &calib_stats, calib, n_workers);
  std::erase_if(calib_stats, [](double s) { return std::isnan(s); });
  std::sort(calib_stats.begin(), calib_stats.end());
  point.threshold = calibrate_threshold(calib_stats, config.target_pf0);
  point.trials_h0 = config.n_channel_draws * config.n_noise_draws_per_channel;
  point.failed_trials += sum(calib.failed);

  // Phase 2: held-out H0 trials measure the achieved false-alarm rate.
  PhaseTally holdout;
  run_phase(config, scenario, stream::kPhaseHoldout, Hypothesis::kH0, config.n_h1_channel_draws,
            weights, &point.threshold, nullptr, holdout, n_workers);
  const long long n_holdout = sum(holdout.valid);
  point.pf0_achieved =
      n_holdout > 0 ? static_cast<double>(sum(holdout.exceed)) / static_cast<double>(n_holdout)
                    : 0.0;
  point.std_err_pf0 = cluster_std_err(holdout, point.pf0_achieved);
  point.failed_trials += sum(holdout.failed);

  // Phase 3: fresh H1 trials estimate the detection rate.
  PhaseTally h1;
  run_phase(config, scenario, stream::kPhaseH1, Hypothesis::kH1, config.n_h1_channel_draws,
            weights, &point.threshold, nullptr, h1, n_workers);
  const long long n_h1 = sum(h1.valid);
  point.pd0 = n_h1 > 0 ? static_cast<double>(sum(h1.exceed)) / static_cast<double>(n_h1) : 0.0;
  point.std_err_pd0 = cluster_std_err(h1, point.pd0);
  point.trials_h1 = config.n_h1_channel_draws * config.n_noise_draws_per_channel;
  point.failed_trials += sum(h1.failed);

  return point;
}

}  // namespace risfuse
