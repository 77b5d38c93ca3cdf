// SPDX-License-Identifier: Apache-2.0
//
// Fusion statistics computed at the FC from the received vector y and
// channel-state inputs:
//
//   LLR     log of the exact likelihood ratio, summed over all 2^K decision
//           vectors with conditionally independent per-sensor pmfs;
//   MRC     Re(a^H y) with a = H^e D_alpha^{1/2} 1 (perfect-sensor reduction);
//   mMRC-1  a = H^e V(Theta)^{-1} D_alpha^{-1/2} 1 (instantaneous Gram);
//   mMRC-2  a = H^e Vbar(Theta)^{-1} D_alpha^{-1/2} 1 (expected Gram);
//   ZFC     a = H^e (H^e^H H^e)^{-1} D_alpha^{-1/2} 1; on noiseless input the
//           statistic equals sum_k x_k exactly, so it is implemented without
//           any 1/N display normalization (decisions are scale invariant).
//
// All linear-system inverses go through LDLT solves; a reciprocal condition
// estimate below 1e-12 is reported as a numerical error.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "risfuse/types.hpp"

namespace risfuse {

/// Local sensor quality: detection/false-alarm probabilities and transmit
/// energies (diagonal of D_alpha).
template <typename Scalar>
struct SensorModel {
  RVec<Scalar> pd;
  RVec<Scalar> pf;
  RVec<Scalar> alpha;

  Index n_sensors() const { return pd.size(); }

  void validate() const {
    if (pd.size() != pf.size() || pd.size() != alpha.size() || pd.size() < 1)
      throw std::invalid_argument("sensor model: inconsistent sizes");
    for (Index k = 0; k < pd.size(); ++k) {
      if (pd[k] < Scalar(0) || pd[k] > Scalar(1) || pf[k] < Scalar(0) || pf[k] > Scalar(1))
        throw std::invalid_argument("sensor model: probabilities must lie in [0, 1]");
      if (pd[k] < pf[k])
        throw std::invalid_argument("sensor model: requires pd_k >= pf_k");
      if (!(alpha[k] > Scalar(0)))
        throw std::invalid_argument("sensor model: alpha_k must be > 0");
    }
  }
};

/// Inputs one fusion statistic needs for a single received vector. The Gram
/// matrices are optional: v feeds mMRC-1, v_bar feeds mMRC-2.
template <typename Scalar>
struct FusionInput {
  CVec<Scalar> y;
  CMat<Scalar> h_e;
  std::optional<CMat<Scalar>> v;
  std::optional<CMat<Scalar>> v_bar;
  Scalar sigma_w2 = Scalar(1);
  SensorModel<Scalar> sensors;
};

inline constexpr Index kMaxLlrSensors = 20;  // 2^K enumeration bound

// ---------------------------------------------------------------------------
// Combiners. Each returns the length-N weight vector a; the statistic itself
// is Re(a^H y), linear in y.

template <typename Scalar>
Scalar linear_statistic(const CVec<Scalar>& a, const CVec<Scalar>& y) {
  return a.dot(y).real();
}

template <typename Scalar>
CVec<Scalar> mrc_combiner(const CMat<Scalar>& h_e, const RVec<Scalar>& alpha) {
  return h_e * alpha.cwiseSqrt().template cast<Cplx<Scalar>>();
}

namespace detail {

/// LDLT factorization with a conditioning guard: the spread of the pivoted
/// diagonal is a reliable singularity witness for the Hermitian PSD Gram
/// matrices used here (Eigen's rcond() is not, on exactly singular input).
template <typename Scalar>
Eigen::LDLT<CMat<Scalar>> checked_ldlt(const CMat<Scalar>& gram, const char* what,
                                       Scalar max_condition = Scalar(1e12)) {
  Eigen::LDLT<CMat<Scalar>> ldlt(gram);
  const auto d = ldlt.vectorD().cwiseAbs();
  const Scalar spread = d.maxCoeff() > Scalar(0) ? d.minCoeff() / d.maxCoeff() : Scalar(0);
  if (ldlt.info() != Eigen::Success || !(spread > Scalar(1) / max_condition))
    throw std::runtime_error(std::string(what) + ": Gram matrix is numerically singular " +
                             "(pivot spread ~ " +
                             std::to_string(spread > 0 ? 1.0 / double(spread)
                                                       : std::numeric_limits<double>::infinity()) +
                             ")");
  return ldlt;
}

/// Solves gram * c = D_alpha^{-1/2} 1 and returns H^e c.
template <typename Scalar>
CVec<Scalar> gram_solved_combiner(const CMat<Scalar>& h_e, const CMat<Scalar>& gram,
                                  const RVec<Scalar>& alpha, const char* what) {
  const auto ldlt = checked_ldlt(gram, what);
  const CVec<Scalar> rhs = alpha.cwiseSqrt().cwiseInverse().template cast<Cplx<Scalar>>();
  return h_e * ldlt.solve(rhs);
}

}  // namespace detail

template <typename Scalar>
CVec<Scalar> mmrc_combiner(const CMat<Scalar>& h_e, const CMat<Scalar>& gram,
                           const RVec<Scalar>& alpha) {
  return detail::gram_solved_combiner(h_e, gram, alpha, "mmrc");
}

template <typename Scalar>
CVec<Scalar> zfc_combiner(const CMat<Scalar>& h_e, const RVec<Scalar>& alpha) {
  if (h_e.rows() < h_e.cols())
    throw std::invalid_argument("zfc: needs at least as many antennas as sensors");
  const CMat<Scalar> gram = h_e.adjoint() * h_e;
  return detail::gram_solved_combiner(h_e, gram, alpha, "zfc");
}

// ---------------------------------------------------------------------------
// Exact log-likelihood ratio.

/// Precomputes everything about (H^e, D_alpha, sigma_w2, sensor pmfs) so the
/// per-y evaluation touches only the K-dimensional matched filter output.
///
/// With z = Re((H^e D^{1/2})^H y) and Q = Re(D^{1/2} H^e^H H^e D^{1/2}), the
/// exponent of decision vector x is (2 x^T z - x^T Q x)/sigma_w2 up to a term
/// common to both hypotheses; the two sums are accumulated max-shifted in the
/// log domain. A hypothesis whose sum vanishes entirely yields a +-infinity
/// sentinel.
template <typename Scalar>
class LlrEvaluator {
 public:
  LlrEvaluator(const CMat<Scalar>& h_e, Scalar sigma_w2, const SensorModel<Scalar>& sensors) {
    sensors.validate();
    const Index k = sensors.n_sensors();
    if (k > kMaxLlrSensors)
      throw std::invalid_argument("llr: 2^K enumeration supports at most K = 20 sensors");
    if (h_e.cols() != k) throw std::invalid_argument("llr: channel/sensor size mismatch");
    if (!(sigma_w2 > Scalar(0))) throw std::invalid_argument("llr: sigma_w2 must be > 0");

    h_alpha_ = h_e * sensors.alpha.cwiseSqrt().template cast<Cplx<Scalar>>().asDiagonal();
    inv_sigma2_ = Scalar(1) / sigma_w2;

    const Index n_vectors = Index(1) << k;
    signs_.resize(n_vectors, k);
    log_p_h1_.resize(n_vectors);
    log_p_h0_.resize(n_vectors);
    for (Index i = 0; i < n_vectors; ++i) {
      Scalar lp1 = Scalar(0), lp0 = Scalar(0);
      for (Index bit = 0; bit < k; ++bit) {
        const bool plus = (i >> bit) & 1;
        signs_(i, bit) = plus ? Scalar(1) : Scalar(-1);
        lp1 += std::log(plus ? sensors.pd[bit] : Scalar(1) - sensors.pd[bit]);
        lp0 += std::log(plus ? sensors.pf[bit] : Scalar(1) - sensors.pf[bit]);
      }
      log_p_h1_[i] = lp1;
      log_p_h0_[i] = lp0;
    }
    const RMat<Scalar> q = (h_alpha_.adjoint() * h_alpha_).real();
    quad_ = (signs_ * q).cwiseProduct(signs_).rowwise().sum();
  }

  Scalar operator()(const CVec<Scalar>& y) const {
    const RVec<Scalar> z = (h_alpha_.adjoint() * y).real();
    const RVec<Scalar> exponent = (Scalar(2) * (signs_ * z) - quad_) * inv_sigma2_;
    return log_sum(exponent + log_p_h1_) - log_sum(exponent + log_p_h0_);
  }

  const CMat<Scalar>& scaled_channel() const { return h_alpha_; }

 private:
  static Scalar log_sum(const RVec<Scalar>& t) {
    const Scalar m = t.maxCoeff();
    if (!std::isfinite(m)) return -std::numeric_limits<Scalar>::infinity();
    return m + std::log((t.array() - m).exp().sum());
  }

  CMat<Scalar> h_alpha_;
  RMat<Scalar> signs_;
  RVec<Scalar> quad_;
  RVec<Scalar> log_p_h1_;
  RVec<Scalar> log_p_h0_;
  Scalar inv_sigma2_ = Scalar(1);
};

// ---------------------------------------------------------------------------
// Statistic entry points.

template <typename Scalar>
Scalar llr_statistic(const FusionInput<Scalar>& input) {
  return LlrEvaluator<Scalar>(input.h_e, input.sigma_w2, input.sensors)(input.y);
}

template <typename Scalar>
Scalar mrc_statistic(const FusionInput<Scalar>& input) {
  return linear_statistic(mrc_combiner(input.h_e, input.sensors.alpha), input.y);
}

namespace detail {

template <typename Scalar>
void require_hermitian(const CMat<Scalar>& v, const char* what) {
  const Scalar scale = std::max(Scalar(1), v.cwiseAbs().maxCoeff());
  if (!((v - v.adjoint()).cwiseAbs().maxCoeff() <= Scalar(1e-10) * scale))
    throw std::invalid_argument(std::string(what) + ": Gram matrix must be Hermitian");
}

}  // namespace detail

template <typename Scalar>
Scalar mmrc1_statistic(const FusionInput<Scalar>& input) {
  if (!input.v) throw std::invalid_argument("mmrc1: instantaneous Gram matrix V is required");
  detail::require_hermitian(*input.v, "mmrc1");
  return linear_statistic(mmrc_combiner(input.h_e, *input.v, input.sensors.alpha), input.y);
}

template <typename Scalar>
Scalar mmrc2_statistic(const FusionInput<Scalar>& input) {
  if (!input.v_bar) throw std::invalid_argument("mmrc2: expected Gram matrix Vbar is required");
  detail::require_hermitian(*input.v_bar, "mmrc2");
  return linear_statistic(mmrc_combiner(input.h_e, *input.v_bar, input.sensors.alpha), input.y);
}

template <typename Scalar>
Scalar zfc_statistic(const FusionInput<Scalar>& input) {
  return linear_statistic(zfc_combiner(input.h_e, input.sensors.alpha), input.y);
}

}  // namespace risfuse
