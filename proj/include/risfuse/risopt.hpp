// SPDX-License-Identifier: Apache-2.0
//
// Long-term RIS phase design. The noise-variance proxy
//   f(theta) = 1^T D_alpha^{-1/2} V_los^{-1}(theta) D_alpha^{-1/2} 1
// satisfies, by the Sherman-Morrison formula, f(theta) = c0 - g(theta) with
//   g(theta) = |v1^H theta^*|^2 / (theta^T Xi theta^*),
//   v1 = S1 D_wf^{-1} D_alpha^{-1/2} 1,   Xi = (1/M) I + S1 D_wf^{-1} S1^H,
//   S1 = sqrt(d_rf) diag(a_m)^* H_los D_wr^{1/2},
// and c0 = sum_k 1/(alpha_k d_wf_k). Minimizing f is maximizing g, a ratio of
// quadratic forms over unit-modulus theta, solved by a
// majorization-minimization iteration with a closed-form phase update.
//
// The iteration is carried out in psi = theta^*, where both quadratic forms
// are plain Hermitian (psi^H A psi); this keeps the closed-form update and the
// monotone-ascent guarantee aligned with g as defined on theta above.

#pragma once

#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "risfuse/rng.hpp"
#include "risfuse/types.hpp"

namespace risfuse {

/// Long-term quantities defining the phase-design problem.
template <typename Scalar>
struct LongTermDesignInputs {
  CMat<Scalar> s1;   // M x K
  CVec<Scalar> v1;   // M
  CMat<Scalar> xi;   // M x M, Hermitian, >= (1/M) I
  Scalar lambda_max_xi = Scalar(0);
  Scalar c0 = Scalar(0);  // sum_k 1/(alpha_k d_wf_k), the f <-> g offset

  Index n_ris_elements() const { return s1.rows(); }
};

template <typename Scalar>
LongTermDesignInputs<Scalar> build_design_inputs(const CMat<Scalar>& h_los_r,
                                                 const CVec<Scalar>& a_ris_fc,
                                                 const PathGains<Scalar>& gains,
                                                 const RVec<Scalar>& alpha) {
  if ((gains.d_wf.array() <= Scalar(0)).any())
    throw std::invalid_argument("design inputs: d_wf must be strictly positive (D_wf inverse)");
  const Index m = h_los_r.rows();

  LongTermDesignInputs<Scalar> out;
  out.s1 = std::sqrt(gains.d_rf) * a_ris_fc.conjugate().asDiagonal() * h_los_r *
           gains.d_wr.cwiseSqrt().template cast<Cplx<Scalar>>().asDiagonal();
  const RVec<Scalar> inv_wf = gains.d_wf.cwiseInverse();
  out.v1 = out.s1 * inv_wf.cwiseProduct(alpha.cwiseSqrt().cwiseInverse()).template cast<Cplx<Scalar>>();
  out.xi = out.s1 * inv_wf.template cast<Cplx<Scalar>>().asDiagonal() * out.s1.adjoint();
  out.xi += (Scalar(1) / Scalar(m)) *
            CMat<Scalar>::Identity(m, m);
  out.lambda_max_xi =
      Eigen::SelfAdjointEigenSolver<CMat<Scalar>>(out.xi, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();
  out.c0 = inv_wf.cwiseProduct(alpha.cwiseInverse()).sum();
  return out;
}

/// Convenience overload taking the LoS components bundle.
template <typename Scalar, typename Los>
LongTermDesignInputs<Scalar> build_design_inputs(const Los& los, const PathGains<Scalar>& gains,
                                                 const RVec<Scalar>& alpha) {
  return build_design_inputs<Scalar>(los.h_los_r, los.a_ris_fc, gains, alpha);
}

/// g(theta) = |v1^H theta^*|^2 / (theta^T Xi theta^*); non-negative and finite
/// for unit-modulus theta since theta^T Xi theta^* >= ||theta||^2 / M = 1.
template <typename Scalar>
Scalar g_objective(const RisPhases<Scalar>& theta, const LongTermDesignInputs<Scalar>& inputs) {
  const CVec<Scalar> psi = theta.theta.conjugate();
  const Scalar denom = (psi.adjoint() * inputs.xi * psi)(0).real();
  return std::norm(inputs.v1.dot(psi)) / denom;
}

/// One majorization step. Elements whose update direction has zero magnitude
/// keep their previous phase (the angle is undefined there); this preserves
/// both unit modulus and monotone ascent.
template <typename Scalar>
RisPhases<Scalar> mm_update(const RisPhases<Scalar>& theta_l,
                            const LongTermDesignInputs<Scalar>& inputs) {
  const Index m = inputs.n_ris_elements();
  const CVec<Scalar> psi = theta_l.theta.conjugate();
  const Cplx<Scalar> s = inputs.v1.dot(psi);                       // v1^H psi
  const Scalar denom = (psi.adjoint() * inputs.xi * psi)(0).real();  // psi^H Xi psi
  const CVec<Scalar> direction =
      inputs.v1 * (s / denom) -
      (std::norm(s) / (denom * denom)) *
          (inputs.xi * psi - inputs.lambda_max_xi * psi);

  RisPhases<Scalar> next;
  next.theta.resize(m);
  for (Index i = 0; i < m; ++i) {
    const Scalar mag = std::abs(direction[i]);
    next.theta[i] =
        (mag < std::numeric_limits<Scalar>::min()) ? theta_l.theta[i] : std::conj(direction[i] / mag);
  }
  return next;
}

/// Per-run record: objective value at the initial point and after every
/// update, update count and whether the stopping rule fired.
template <typename Scalar>
struct MmTrace {
  std::vector<Scalar> g_values;
  Index iterations = 0;
  bool converged = false;
};

/// Iterates mm_update until |g_{l+1} - g_l| <= rel_tol * max(1, g_l) or
/// max_iter updates. Ascent is monotone, so the final iterate is the best.
template <typename Scalar>
std::pair<RisPhases<Scalar>, MmTrace<Scalar>> optimize_phases(
    const LongTermDesignInputs<Scalar>& inputs, const RisPhases<Scalar>& init,
    Index max_iter = 500, Scalar rel_tol = Scalar(1e-8)) {
  if (max_iter < 1) throw std::invalid_argument("optimize_phases: max_iter must be >= 1");
  if (!(rel_tol > Scalar(0))) throw std::invalid_argument("optimize_phases: rel_tol must be > 0");
  init.validate();

  RisPhases<Scalar> theta = init;
  MmTrace<Scalar> trace;
  Scalar g = g_objective(theta, inputs);
  trace.g_values.push_back(g);
  for (Index l = 1; l <= max_iter; ++l) {
    theta = mm_update(theta, inputs);
    const Scalar g_next = g_objective(theta, inputs);
    trace.g_values.push_back(g_next);
    trace.iterations = l;
    if (std::abs(g_next - g) <= rel_tol * std::max(Scalar(1), g)) {
      trace.converged = true;
      g = g_next;
      break;
    }
    g = g_next;
  }
  return {std::move(theta), std::move(trace)};
}

/// Multi-restart driver: runs optimize_phases from n_restarts random initial
/// phase vectors drawn from `rng` and keeps the best final objective.
template <typename Scalar, typename Rng>
std::pair<RisPhases<Scalar>, MmTrace<Scalar>> optimize_phases_restarts(
    const LongTermDesignInputs<Scalar>& inputs, Index n_restarts, Rng& rng,
    Index max_iter = 500, Scalar rel_tol = Scalar(1e-8)) {
  if (n_restarts < 1) throw std::invalid_argument("optimize_phases_restarts: need >= 1 restart");
  std::pair<RisPhases<Scalar>, MmTrace<Scalar>> best;
  Scalar best_g = -std::numeric_limits<Scalar>::infinity();
  for (Index r = 0; r < n_restarts; ++r) {
    const RisPhases<Scalar> init = random_ris_phases<Scalar>(inputs.n_ris_elements(), rng);
    auto run = optimize_phases(inputs, init, max_iter, rel_tol);
    const Scalar g = run.second.g_values.back();
    if (g > best_g) {
      best_g = g;
      best = std::move(run);
    }
  }
  return best;
}

}  // namespace risfuse
