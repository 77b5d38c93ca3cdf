// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures for the test suites: the default deployment with
// deterministic sensor placement and ready-made fading parameters.

#pragma once

#include <numbers>
#include <random>

#include "risfuse/channel.hpp"
#include "risfuse/fusion.hpp"
#include "risfuse/geometry.hpp"
#include "risfuse/rng.hpp"

namespace testsupport {

using namespace risfuse;

struct SystemFixture {
  NetworkLayout<double> layout;
  SteeringAngles<double> angles;
  LosComponents<double> los;
  PathGains<double> gains;
  FadingParams<double> fading;
  SensorModel<double> sensors;
};

/// Default-deployment fixture: K sensors placed deterministically in the
/// [0,40]^2 field, RIS at [40,20,5], FC at [65,40,2], 5x5 RIS, paper-default
/// path loss and noise; Rician factors drawn in [10,20] dB from `seed`.
inline SystemFixture make_system(Index n_antennas, Index n_sensors = 10,
                                 std::uint64_t seed = 42) {
  SystemFixture s;
  s.layout.sensor_positions.resize(n_sensors, 3);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 40.0);
  for (Index k = 0; k < n_sensors; ++k)
    s.layout.sensor_positions.row(k) << u(rng), u(rng), 0.0;
  s.layout.ris_position << 40.0, 20.0, 5.0;
  s.layout.fc_position << 65.0, 40.0, 2.0;
  s.layout.ris_rows = 5;
  s.layout.ris_cols = 5;
  s.layout.n_fc_antennas = n_antennas;

  s.angles = compute_angles(s.layout);
  s.los = make_los_components(s.layout, s.angles);
  s.gains = compute_path_gains(s.layout, db_to_linear(-20.0), 1.0, 2.0, 4.0);

  std::uniform_real_distribution<double> rician_db(10.0, 20.0);
  s.fading.b_wr.resize(n_sensors);
  for (Index k = 0; k < n_sensors; ++k) s.fading.b_wr[k] = rician_db_to_amplitude(rician_db(rng));
  s.fading.b = rician_db_to_amplitude(rician_db(rng));
  s.fading.sigma_w2 = dbm_to_watt(-70.0);
  s.fading.gains = s.gains;

  s.sensors.pd = RVec<double>::Constant(n_sensors, 0.5);
  s.sensors.pf = RVec<double>::Constant(n_sensors, 0.05);
  s.sensors.alpha = RVec<double>::Constant(n_sensors, 1.0);
  return s;
}

inline RisPhases<double> random_theta(Index m, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  return random_ris_phases<double>(m, rng);
}

constexpr double kPi = std::numbers::pi;

}  // namespace testsupport
