// SPDX-License-Identifier: Apache-2.0
//
// Instantaneous channel draws and the Gram-type matrices used by the fusion
// rules and the RIS optimizer.
//
// Models:
//   * direct links (sensor -> FC) are Rayleigh: H^d = Hhat^d * D_wf^{1/2};
//   * sensor -> RIS and RIS -> FC links are Rician with LoS terms built from
//     far-field steering vectors:
//       H^r = [H_los * B_wr + Hhat^r * (I - B_wr^2)^{1/2}] * D_wr^{1/2}
//       G   = sqrt(d_rf) * (b * a_fc * a_m^H + sqrt(1 - b^2) * Ghat)
//   * the composite channel is H^e(Theta) = G * Theta * H^r + H^d.
//
// For N >> K the scaled Gram matrix H^e(Theta)^H H^e(Theta) / N concentrates
// around V(Theta) = D_wf + H^r^H K(Theta) H^r with
//   K(Theta) = d_rf * Theta^* [(1 - b^2) I + b^2 a_m a_m^H] Theta,
// which is non-diagonal: the RIS path breaks favorable propagation.

#pragma once

#include <stdexcept>
#include <utility>

#include "risfuse/geometry.hpp"
#include "risfuse/rng.hpp"
#include "risfuse/types.hpp"

namespace risfuse {

/// Deterministic LoS building blocks shared by the channel draws, the
/// expected Gram matrices and the RIS design.
template <typename Scalar>
struct LosComponents {
  CMat<Scalar> h_los_r;   // M x K, column k = a_upa(sensor k AoA at the RIS)
  CVec<Scalar> a_ris_fc;  // M, a_upa at the RIS departure angles ("a_M")
  CVec<Scalar> a_fc;      // N, a_ula at the FC arrival azimuth
};

template <typename Scalar>
LosComponents<Scalar> make_los_components(const NetworkLayout<Scalar>& layout,
                                          const SteeringAngles<Scalar>& angles) {
  LosComponents<Scalar> los;
  const Index k_sensors = angles.sensor_at_ris.rows();
  los.h_los_r.resize(layout.n_ris_elements(), k_sensors);
  for (Index k = 0; k < k_sensors; ++k)
    los.h_los_r.col(k) = upa_steering(angles.sensor_at_ris(k, 0), angles.sensor_at_ris(k, 1),
                                      layout.ris_rows, layout.ris_cols);
  los.a_ris_fc = upa_steering(angles.ris_departure[0], angles.ris_departure[1], layout.ris_rows,
                              layout.ris_cols);
  los.a_fc = ula_steering(angles.fc_arrival, layout.n_fc_antennas);
  return los;
}

namespace detail {

/// Theta^* a_m: the RIS-conjugated departure vector entering every K(Theta) form.
template <typename Scalar>
CVec<Scalar> conjugate_phased_departure(const RisPhases<Scalar>& theta, const CVec<Scalar>& a_ris_fc) {
  return theta.theta.conjugate().cwiseProduct(a_ris_fc);
}

/// D_wf + X^H K(Theta) X for an M x K factor X, with the rank-one split of
/// K(Theta) applied directly (no M x M intermediate).
template <typename Scalar>
CMat<Scalar> gram_through_ris(const CMat<Scalar>& x, const RisPhases<Scalar>& theta,
                              const FadingParams<Scalar>& fading, const CVec<Scalar>& a_ris_fc) {
  const Scalar b2 = fading.b * fading.b;
  const CVec<Scalar> u = conjugate_phased_departure(theta, a_ris_fc);
  const CVec<Scalar> xu = x.adjoint() * u;
  CMat<Scalar> v = fading.gains.d_wf.template cast<Cplx<Scalar>>().asDiagonal();
  if (b2 < Scalar(1)) v += (fading.gains.d_rf * (Scalar(1) - b2)) * (x.adjoint() * x);
  v += (fading.gains.d_rf * b2) * (xu * xu.adjoint());
  return v;
}

template <typename Scalar>
void check_hermitian(const CMat<Scalar>& v, const char* what, Scalar tol = Scalar(1e-10)) {
  const Scalar asym = (v - v.adjoint()).cwiseAbs().maxCoeff();
  if (!(asym <= tol))
    throw std::runtime_error(std::string(what) + ": output not Hermitian (max asymmetry " +
                             std::to_string(asym) + ")");
}

}  // namespace detail

/// Rayleigh direct channel H^d (N x K); column k has per-entry variance d_wf_k.
template <typename Scalar, typename Rng>
CMat<Scalar> draw_direct_channel(const NetworkLayout<Scalar>& layout,
                                 const FadingParams<Scalar>& fading, Rng& rng) {
  CMat<Scalar> h = complex_normal_matrix<Scalar>(layout.n_fc_antennas, layout.n_sensors(),
                                                 Scalar(1), rng);
  h *= fading.gains.d_wf.cwiseSqrt().template cast<Cplx<Scalar>>().asDiagonal();
  return h;
}

/// Rician RIS-side channels: returns (H^r of size M x K, G of size N x M).
/// The NLOS parts are drawn from `rng` in this order: Hhat^r then Ghat.
template <typename Scalar, typename Rng>
std::pair<CMat<Scalar>, CMat<Scalar>> draw_ris_channels(const NetworkLayout<Scalar>& layout,
                                                        const LosComponents<Scalar>& los,
                                                        const FadingParams<Scalar>& fading,
                                                        Rng& rng) {
  const Index m = layout.n_ris_elements();
  const Index k_sensors = layout.n_sensors();
  const Index n = layout.n_fc_antennas;

  CMat<Scalar> h_r = complex_normal_matrix<Scalar>(m, k_sensors, Scalar(1), rng);
  for (Index k = 0; k < k_sensors; ++k) {
    const Scalar bk = fading.b_wr[k];
    h_r.col(k) = (los.h_los_r.col(k) * bk + h_r.col(k) * std::sqrt(Scalar(1) - bk * bk)) *
                 std::sqrt(fading.gains.d_wr[k]);
  }

  CMat<Scalar> g = complex_normal_matrix<Scalar>(n, m, Scalar(1), rng);
  g = std::sqrt(fading.gains.d_rf) *
      (fading.b * (los.a_fc * los.a_ris_fc.adjoint()) + std::sqrt(Scalar(1) - fading.b * fading.b) * g);
  return {std::move(h_r), std::move(g)};
}

/// H^e(Theta) = G * diag(theta) * H^r + H^d.
template <typename Scalar>
CMat<Scalar> composite_channel(const ChannelRealization<Scalar>& real,
                               const RisPhases<Scalar>& theta) {
  if (real.g.cols() != real.h_r.rows() || real.h_d.rows() != real.g.rows() ||
      real.h_d.cols() != real.h_r.cols() || theta.theta.size() != real.g.cols())
    throw std::invalid_argument("composite_channel: inconsistent dimensions");
  return real.g * theta.theta.asDiagonal() * real.h_r + real.h_d;
}

/// Instantaneous V(Theta) = D_wf + H^r^H K(Theta) H^r. Hermitian positive
/// definite (D_wf floor plus PSD updates).
template <typename Scalar>
CMat<Scalar> gram_v(const CMat<Scalar>& h_r, const RisPhases<Scalar>& theta,
                    const FadingParams<Scalar>& fading, const CVec<Scalar>& a_ris_fc) {
  CMat<Scalar> v = detail::gram_through_ris(h_r, theta, fading, a_ris_fc);
  detail::check_hermitian(v, "gram_v");
  return v;
}

/// Expected Gram matrix V_bar(Theta) = D_wf + D_wr (I - B_wr^2)
///   + (H_los B_wr D_wr^{1/2})^H K(Theta) (H_los B_wr D_wr^{1/2}).
/// Depends only on long-term statistics.
template <typename Scalar>
CMat<Scalar> v_bar(const LosComponents<Scalar>& los, const RisPhases<Scalar>& theta,
                   const FadingParams<Scalar>& fading) {
  const CMat<Scalar> los_scaled =
      los.h_los_r * fading.b_wr.cwiseProduct(fading.gains.d_wr.cwiseSqrt())
                        .template cast<Cplx<Scalar>>()
                        .asDiagonal();
  CMat<Scalar> v = detail::gram_through_ris(los_scaled, theta, fading, los.a_ris_fc);
  const RVec<Scalar> nlos_power =
      fading.gains.d_wr.cwiseProduct((Scalar(1) - fading.b_wr.array().square()).matrix());
  v += nlos_power.template cast<Cplx<Scalar>>().asDiagonal();
  detail::check_hermitian(v, "v_bar");
  return v;
}

/// Dominant-LoS Gram matrix V_los(Theta) = D_wf + d_rf * w w^H with
/// w = (H_los D_wr^{1/2})^H Theta^* a_m: D_wf plus a rank-one update.
template <typename Scalar>
CMat<Scalar> v_los(const LosComponents<Scalar>& los, const RisPhases<Scalar>& theta,
                   const FadingParams<Scalar>& fading) {
  const CVec<Scalar> u = detail::conjugate_phased_departure(theta, los.a_ris_fc);
  const CVec<Scalar> w =
      (los.h_los_r * fading.gains.d_wr.cwiseSqrt().template cast<Cplx<Scalar>>().asDiagonal())
          .adjoint() *
      u;
  CMat<Scalar> v = fading.gains.d_wf.template cast<Cplx<Scalar>>().asDiagonal();
  v += fading.gains.d_rf * (w * w.adjoint());
  detail::check_hermitian(v, "v_los");
  return v;
}

/// Receiver noise w ~ CN(0, sigma_w2 * I_n).
template <typename Scalar, typename Rng>
CVec<Scalar> draw_noise(Index n, Scalar sigma_w2, Rng& rng) {
  if (!(sigma_w2 > Scalar(0))) throw std::invalid_argument("draw_noise: sigma_w2 must be > 0");
  return complex_normal_vector<Scalar>(n, sigma_w2, rng);
}

}  // namespace risfuse
