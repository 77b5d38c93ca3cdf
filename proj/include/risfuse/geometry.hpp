// SPDX-License-Identifier: Apache-2.0
//
// Deterministic long-term geometry: path-loss gains, steering angles and
// array steering vectors.
//
// Frame convention (fixed for reproducibility):
//   * coordinates are (x, y, z) meters with z up;
//   * azimuth(d) = atan2(d.y, d.x) in (-pi, pi];
//   * elevation(d) = atan2(d.z, hypot(d.x, d.y)) in [-pi/2, pi/2];
//   * the FC uniform linear array lies along the global y axis, so its scalar
//     steering angle is the azimuth of the arriving direction;
//   * the RIS is a planar half-wavelength grid facing the sensor field.
// Any consistent frame yields the same channel statistics; this one is
// declared so angle outputs (and tests) are stable.

#pragma once

#include <cmath>
#include <stdexcept>

#include "risfuse/types.hpp"

namespace risfuse {

/// Distance-power law P(d, nu) = mu * (d / d0)^(-nu).
/// Strictly decreasing in d for nu > 0. Throws for non-positive d or d0.
template <typename Scalar>
Scalar path_loss(Scalar distance, Scalar exponent, Scalar mu, Scalar d0) {
  if (!(distance > Scalar(0))) throw std::invalid_argument("path_loss: distance must be > 0");
  if (!(d0 > Scalar(0))) throw std::invalid_argument("path_loss: d0 must be > 0");
  if (!(mu > Scalar(0))) throw std::invalid_argument("path_loss: mu must be > 0");
  return mu * std::pow(distance / d0, -exponent);
}

/// Half-wavelength ULA steering vector: element i (0-based) is
/// exp(j*pi*i*sin(azimuth)). Every entry has unit modulus.
template <typename Scalar>
CVec<Scalar> ula_steering(Scalar azimuth, Index n) {
  if (n < 1) throw std::invalid_argument("ula_steering: n must be >= 1");
  const Scalar step = Scalar(EIGEN_PI) * std::sin(azimuth);
  CVec<Scalar> a(n);
  for (Index i = 0; i < n; ++i)
    a[i] = std::polar(Scalar(1), step * Scalar(i));
  return a;
}

/// Half-wavelength UPA steering vector on an m1 x m2 grid, flattened row-major:
/// element (p, q) is exp(j*pi*(p*sin(el)*sin(az) + q*sin(el)*cos(az))).
template <typename Scalar>
CVec<Scalar> upa_steering(Scalar azimuth, Scalar elevation, Index m1, Index m2) {
  if (m1 < 1 || m2 < 1) throw std::invalid_argument("upa_steering: grid must be >= 1x1");
  const Scalar row_step = Scalar(EIGEN_PI) * std::sin(elevation) * std::sin(azimuth);
  const Scalar col_step = Scalar(EIGEN_PI) * std::sin(elevation) * std::cos(azimuth);
  CVec<Scalar> a(m1 * m2);
  for (Index p = 0; p < m1; ++p)
    for (Index q = 0; q < m2; ++q)
      a[p * m2 + q] = std::polar(Scalar(1), row_step * Scalar(p) + col_step * Scalar(q));
  return a;
}

namespace detail {
template <typename Scalar>
Eigen::Vector2<Scalar> direction_angles(const Eigen::Vector3<Scalar>& d) {
  const Scalar horiz = std::hypot(d.x(), d.y());
  return {std::atan2(d.y(), d.x()), std::atan2(d.z(), horiz)};
}
}  // namespace detail

/// Angles of every sensor as seen from the RIS, of the FC as seen from the
/// RIS (departure) and of the RIS as seen from the FC array.
/// Invariant under a common translation of all positions.
template <typename Scalar>
SteeringAngles<Scalar> compute_angles(const NetworkLayout<Scalar>& layout) {
  layout.validate();
  SteeringAngles<Scalar> angles;
  angles.sensor_at_ris.resize(layout.n_sensors(), 2);
  for (Index k = 0; k < layout.n_sensors(); ++k) {
    const Eigen::Vector3<Scalar> d =
        Eigen::Vector3<Scalar>(layout.sensor_positions.row(k)) - layout.ris_position;
    angles.sensor_at_ris.row(k) = detail::direction_angles<Scalar>(d);
  }
  angles.ris_departure = detail::direction_angles<Scalar>(layout.fc_position - layout.ris_position);
  angles.fc_arrival = detail::direction_angles<Scalar>(layout.ris_position - layout.fc_position)[0];
  return angles;
}

/// Per-link gains from the layout: sensor->FC uses exponent nu_direct,
/// sensor->RIS and RIS->FC use nu_ris. Distances below d0 clamp to d0 so no
/// gain ever exceeds mu.
template <typename Scalar>
PathGains<Scalar> compute_path_gains(const NetworkLayout<Scalar>& layout, Scalar mu, Scalar d0,
                                     Scalar nu_ris, Scalar nu_direct) {
  layout.validate();
  const auto clamped = [&](Scalar d) { return std::max(d, d0); };
  PathGains<Scalar> gains;
  gains.d_wf.resize(layout.n_sensors());
  gains.d_wr.resize(layout.n_sensors());
  for (Index k = 0; k < layout.n_sensors(); ++k) {
    const Eigen::Vector3<Scalar> s = layout.sensor_positions.row(k);
    gains.d_wf[k] = path_loss(clamped((s - layout.fc_position).norm()), nu_direct, mu, d0);
    gains.d_wr[k] = path_loss(clamped((s - layout.ris_position).norm()), nu_ris, mu, d0);
  }
  gains.d_rf = path_loss(clamped((layout.ris_position - layout.fc_position).norm()), nu_ris, mu, d0);
  gains.validate();
  return gains;
}

}  // namespace risfuse
