// SPDX-License-Identifier: Apache-2.0
//
// risfuse -- decision fusion over RIS-assisted massive MIMO links.
//
// Core dense types. Everything is an Eigen value type templated on the real
// scalar; complex quantities use std::complex<Scalar>. All structs are plain
// aggregates with a validate() that throws std::invalid_argument, so they can
// be built field-by-field and checked once at the API boundary.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace risfuse {

template <typename Scalar>
using Cplx = std::complex<Scalar>;
template <typename Scalar>
using CMat = Eigen::Matrix<Cplx<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using CVec = Eigen::Matrix<Cplx<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using RMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Unit conversions. All link budgets are kept in linear watts internally.

/// dB -> linear power ratio.
template <typename Scalar>
Scalar db_to_linear(Scalar value_db) {
  return std::pow(Scalar(10), value_db / Scalar(10));
}

/// dBm -> watts (e.g. -70 dBm -> 1e-10 W).
template <typename Scalar>
Scalar dbm_to_watt(Scalar value_dbm) {
  return std::pow(Scalar(10), (value_dbm - Scalar(30)) / Scalar(10));
}

/// Rician factor kappa in dB -> LoS amplitude fraction b = sqrt(kappa/(1+kappa)).
/// The squared fraction b^2 is the LoS share of the total link power.
template <typename Scalar>
Scalar rician_db_to_amplitude(Scalar kappa_db) {
  const Scalar kappa = db_to_linear(kappa_db);
  return std::sqrt(kappa / (Scalar(1) + kappa));
}

// ---------------------------------------------------------------------------
// Network geometry.

/// Physical deployment: K sensor positions, RIS and FC positions (meters,
/// z-up), the FC uniform linear array size N and the RIS planar grid M1 x M2.
template <typename Scalar>
struct NetworkLayout {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> sensor_positions;  // K x 3 [m]
  Eigen::Vector3<Scalar> ris_position{Scalar(0), Scalar(0), Scalar(0)};
  Eigen::Vector3<Scalar> fc_position{Scalar(0), Scalar(0), Scalar(0)};
  Index n_fc_antennas = 1;  // N
  Index ris_rows = 1;       // M1
  Index ris_cols = 1;       // M2

  Index n_sensors() const { return sensor_positions.rows(); }
  Index n_ris_elements() const { return ris_rows * ris_cols; }

  void validate() const {
    if (n_sensors() < 1) throw std::invalid_argument("layout: need at least one sensor");
    if (n_fc_antennas < 1) throw std::invalid_argument("layout: n_fc_antennas must be >= 1");
    if (ris_rows < 1 || ris_cols < 1) throw std::invalid_argument("layout: RIS grid must be >= 1x1");
    if (!sensor_positions.allFinite() || !ris_position.allFinite() || !fc_position.allFinite())
      throw std::invalid_argument("layout: positions must be finite");
    for (Index k = 0; k < n_sensors(); ++k) {
      const Eigen::Vector3<Scalar> s = sensor_positions.row(k);
      if ((s - ris_position).norm() <= Scalar(0) || (s - fc_position).norm() <= Scalar(0))
        throw std::invalid_argument("layout: sensor " + std::to_string(k) +
                                    " coincides with the RIS or the FC");
    }
    if ((ris_position - fc_position).norm() <= Scalar(0))
      throw std::invalid_argument("layout: RIS and FC positions coincide");
  }
};

/// Far-field angles derived from the layout. Azimuths lie in (-pi, pi],
/// elevations in [-pi/2, pi/2]; see geometry.hpp for the frame convention.
template <typename Scalar>
struct SteeringAngles {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> sensor_at_ris;  // K x (azimuth, elevation), AoA at RIS
  Eigen::Vector2<Scalar> ris_departure{Scalar(0), Scalar(0)};  // (azimuth, elevation), RIS -> FC
  Scalar fc_arrival = Scalar(0);  // azimuth of the RIS as seen from the FC array
};

/// Linear power gains of the three link families.
template <typename Scalar>
struct PathGains {
  RVec<Scalar> d_wf;       // K, sensor -> FC (diagonal of D_wf)
  RVec<Scalar> d_wr;       // K, sensor -> RIS (diagonal of D_wr)
  Scalar d_rf = Scalar(0);  // RIS -> FC

  void validate() const {
    if (d_wf.size() != d_wr.size()) throw std::invalid_argument("path gains: size mismatch");
    if ((d_wf.array() <= Scalar(0)).any() || (d_wr.array() <= Scalar(0)).any() || d_rf <= Scalar(0))
      throw std::invalid_argument("path gains: all gains must be > 0");
  }
};

// ---------------------------------------------------------------------------
// Fading statistics.

/// Long-term channel statistics: LoS amplitude fractions (diagonal of B_wr
/// for the sensor->RIS links, scalar b for RIS->FC), noise power, path gains.
template <typename Scalar>
struct FadingParams {
  RVec<Scalar> b_wr;           // K entries in [0, 1]
  Scalar b = Scalar(0);        // in [0, 1]
  Scalar sigma_w2 = Scalar(1);  // noise power [W], strictly positive
  PathGains<Scalar> gains;

  void validate() const {
    gains.validate();
    if (b_wr.size() != gains.d_wr.size())
      throw std::invalid_argument("fading: b_wr size does not match path gains");
    if ((b_wr.array() < Scalar(0)).any() || (b_wr.array() > Scalar(1)).any())
      throw std::invalid_argument("fading: b_wr entries must lie in [0, 1]");
    if (b < Scalar(0) || b > Scalar(1)) throw std::invalid_argument("fading: b must lie in [0, 1]");
    if (!(sigma_w2 > Scalar(0)))
      throw std::invalid_argument("fading: sigma_w2 must be > 0 (zero noise is rejected)");
  }
};

/// One instantaneous draw of the three channels: direct H^d (N x K),
/// sensor->RIS H^r (M x K) and RIS->FC G (N x M).
template <typename Scalar>
struct ChannelRealization {
  CMat<Scalar> h_d;
  CMat<Scalar> h_r;
  CMat<Scalar> g;
};

// ---------------------------------------------------------------------------
// RIS configuration.

/// Unit-modulus reflection coefficients theta with |theta_m| = 1.
template <typename Scalar>
struct RisPhases {
  CVec<Scalar> theta;

  Index size() const { return theta.size(); }

  static RisPhases from_phases(const RVec<Scalar>& phases) {
    RisPhases out;
    out.theta.resize(phases.size());
    for (Index i = 0; i < phases.size(); ++i) out.theta[i] = std::polar(Scalar(1), phases[i]);
    return out;
  }

  void validate(Scalar tol = Scalar(1e-12)) const {
    if (theta.size() < 1) throw std::invalid_argument("ris phases: empty vector");
    if (((theta.array().abs() - Scalar(1)).abs() > tol).any())
      throw std::invalid_argument("ris phases: entries must be unit modulus");
  }
};

}  // namespace risfuse
