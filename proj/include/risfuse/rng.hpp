// SPDX-License-Identifier: Apache-2.0
//
// Deterministic substream RNG. One master seed; every draw site derives its
// own engine from (master, path of tags/indices), so results never depend on
// execution order or worker count. Engines must not be shared across threads.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "risfuse/types.hpp"

namespace risfuse {

namespace stream {
// Purpose tags for substream derivation.
inline constexpr std::uint64_t kLayout = 1;
inline constexpr std::uint64_t kRicianFactors = 2;
inline constexpr std::uint64_t kRisInit = 3;
inline constexpr std::uint64_t kDirectChannel = 4;
inline constexpr std::uint64_t kRisChannel = 5;
inline constexpr std::uint64_t kDecisions = 6;
inline constexpr std::uint64_t kNoise = 7;
inline constexpr std::uint64_t kRestart = 8;
inline constexpr std::uint64_t kPoint = 9;
// Monte Carlo phases (calibration / held-out H0 / H1 estimation).
inline constexpr std::uint64_t kPhaseCalibrate = 101;
inline constexpr std::uint64_t kPhaseHoldout = 102;
inline constexpr std::uint64_t kPhaseH1 = 103;
}  // namespace stream

/// SplitMix64 finalizer; used only to mix seeds, never as the sampling engine.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a master seed with a path of tags/indices into a single 64-bit seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (const std::uint64_t p : path) h = splitmix64(h ^ (p + 0x9e3779b97f4a7c15ULL));
  return h;
}

/// Fresh engine for the substream identified by (master, path).
inline std::mt19937_64 make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return std::mt19937_64(derive_seed(master, path));
}

/// One circularly-symmetric complex normal sample with complex variance `var`
/// (real and imaginary parts are independent N(0, var/2)).
template <typename Scalar, typename Rng>
Cplx<Scalar> complex_normal(Scalar var, Rng& rng) {
  std::normal_distribution<Scalar> n(Scalar(0), std::sqrt(var / Scalar(2)));
  return Cplx<Scalar>(n(rng), n(rng));
}

/// Vector of i.i.d. complex normal entries, filled top to bottom.
template <typename Scalar, typename Rng>
CVec<Scalar> complex_normal_vector(Index n, Scalar var, Rng& rng) {
  std::normal_distribution<Scalar> dist(Scalar(0), std::sqrt(var / Scalar(2)));
  CVec<Scalar> out(n);
  for (Index i = 0; i < n; ++i) out[i] = Cplx<Scalar>(dist(rng), dist(rng));
  return out;
}

/// Matrix of i.i.d. complex normal entries, filled column by column.
template <typename Scalar, typename Rng>
CMat<Scalar> complex_normal_matrix(Index rows, Index cols, Scalar var, Rng& rng) {
  std::normal_distribution<Scalar> dist(Scalar(0), std::sqrt(var / Scalar(2)));
  CMat<Scalar> out(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) out(r, c) = Cplx<Scalar>(dist(rng), dist(rng));
  return out;
}

/// Uniform phases in [0, 2*pi) turned into unit-modulus RIS coefficients.
template <typename Scalar, typename Rng>
RisPhases<Scalar> random_ris_phases(Index m, Rng& rng) {
  std::uniform_real_distribution<Scalar> u(Scalar(0), Scalar(2) * Scalar(EIGEN_PI));
  RVec<Scalar> phases(m);
  for (Index i = 0; i < m; ++i) phases[i] = u(rng);
  return RisPhases<Scalar>::from_phases(phases);
}

}  // namespace risfuse
