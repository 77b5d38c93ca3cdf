// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo detection engine: draws hypotheses, sensor decisions, channels
// and noise; calibrates the decision threshold at a target false-alarm rate;
// estimates (P_F0, P_D0); computes the ideal-channel observation bound.
//
// Protocol (Neyman-Pearson style, three independent phases):
//   1. calibration:   n_channel_draws x n_noise_draws_per_channel H0 trials;
//                     the threshold is the empirical (1 - target_pf0)
//                     quantile of the pooled statistics;
//   2. held-out H0:   fresh trials measuring the achieved false-alarm rate;
//   3. H1 estimation: fresh trials measuring P_D0.
// Decisions use strict ">" at the threshold. Trials are keyed by
// (phase, channel index, noise index) RNG substreams, so a run is bit-exact
// reproducible for any worker count.
//
// Standard errors: trials sharing a channel draw are correlated, so the
// reported std errors are cluster-robust across channel draws (they reduce to
// the plain binomial form when every channel hosts a single trial).

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risfuse/channel.hpp"
#include "risfuse/fusion.hpp"
#include "risfuse/types.hpp"

namespace risfuse {

enum class Rule { kLlr, kMrc, kMmrc1, kMmrc2, kZfc };
enum class RisMode { kRandomPhases, kLongTermDesign };
enum class Hypothesis { kH0, kH1 };

const char* to_string(Rule rule);
const char* to_string(RisMode mode);
Rule rule_from_string(const std::string& name);
RisMode ris_mode_from_string(const std::string& name);

/// Monte Carlo shape of one operating point.
struct TrialConfig {
  Index n_channel_draws = 20000;         // H0 calibration channel draws
  Index n_noise_draws_per_channel = 10;  // trials per channel draw (all phases)
  Index n_h1_channel_draws = 5000;       // H1 channel draws; the held-out H0
                                         // phase uses the same count
  double target_pf0 = 0.01;
  std::uint64_t master_seed = 1;
  Rule rule = Rule::kMrc;
  RisMode ris_mode = RisMode::kRandomPhases;

  void validate() const;
};

/// Full system inputs for one operating point.
struct Scenario {
  NetworkLayout<double> layout;
  SteeringAngles<double> angles;
  LosComponents<double> los;
  FadingParams<double> fading;
  SensorModel<double> sensors;
  RisPhases<double> theta;
};

/// Estimated operating point.
struct RocPoint {
  double pf0_achieved = 0.0;
  double pd0 = 0.0;
  double threshold = 0.0;
  long long trials_h0 = 0;  // calibration trials
  long long trials_h1 = 0;
  double std_err_pd0 = 0.0;
  double std_err_pf0 = 0.0;      // held-out H0 phase (same trial count as H1)
  long long failed_trials = 0;   // trials lost to numerical failures, all phases
};

/// BPSK-mapped local decisions: x_k = +1 with probability pd_k under H1 and
/// pf_k under H0, independently across sensors.
template <typename Rng>
RVec<double> draw_decisions(const SensorModel<double>& sensors, Hypothesis hypothesis, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RVec<double>& p_one = (hypothesis == Hypothesis::kH1) ? sensors.pd : sensors.pf;
  RVec<double> x(p_one.size());
  for (Index k = 0; k < p_one.size(); ++k) x[k] = (u(rng) < p_one[k]) ? 1.0 : -1.0;
  return x;
}

/// Empirical (1 - target_pf0) quantile of sorted H0 statistics: the largest
/// order statistic leaving at most floor(target_pf0 * n) strict exceedances.
/// Warns to stderr when fewer than ceil(10 / target_pf0) samples are given.
double calibrate_threshold(const std::vector<double>& sorted_h0_statistics, double target_pf0);

/// Two-phase Monte Carlo estimate of the operating point; deterministic given
/// (config, scenario) for any worker count. n_workers <= 0 uses all cores.
RocPoint estimate_roc_point(const TrialConfig& config, const Scenario& scenario,
                            int n_workers = 0);

/// Ideal-channel counting-rule operating point at discrete threshold nu:
/// exact binomial tail sums P(#(x_k = +1) >= nu) under H1 and H0.
struct ObservationBoundPoint {
  Index nu = 0;
  double pf0_ob = 0.0;
  double pd0_ob = 0.0;
};

ObservationBoundPoint observation_bound(Index k, double pd, double pf, Index nu);

/// All K + 1 operating points nu = 0..K; both coordinates are non-increasing
/// in nu.
std::vector<ObservationBoundPoint> observation_bound_curve(Index k, double pd, double pf);

/// Piecewise-linear interpolation of the bound polyline at a false-alarm rate.
double observation_bound_pd_at(const std::vector<ObservationBoundPoint>& curve, double pf0);

}  // namespace risfuse
