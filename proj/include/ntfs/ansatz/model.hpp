// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/core.hpp"
#include "ntfs/thermofield.hpp"

#include <cmath>
#include <concepts>
#include <random>
#include <utility>
#include <string>

namespace ntfs {

/// psi(S) together with its parameter gradient d psi / d theta_k. Finite at
/// exact zeros of psi, where log-derivatives are undefined.
struct AmplitudeGradient {
  cplx value{0.0, 0.0};
  VectorXc gradient;
};

/// Requirements on a variational wave function over doubled configurations.
///
/// Parameters are exposed as a complex vector. Models with real parameters
/// (`holomorphic == false`) keep the imaginary parts at zero and report
/// log-derivatives with respect to the real parameters.
template <class M>
concept WaveFunction = requires(const M& m, M& mut, const DoubledConfiguration& c,
                                const VectorXc& theta) {
  { M::holomorphic } -> std::convertible_to<bool>;
  { m.n_sites() } -> std::convertible_to<int>;
  { m.n_parameters() } -> std::convertible_to<Eigen::Index>;
  { m.basis() } -> std::same_as<AuxBasis>;
  { m.parameters() } -> std::convertible_to<const VectorXc&>;
  mut.set_parameters(theta);
  { m.log_amplitude(c) } -> std::same_as<cplx>;
  { m.log_derivatives(c) } -> std::same_as<VectorXc>;
  { m.amplitude_gradient(c) } -> std::same_as<AmplitudeGradient>;
};

template <class M>
concept Autoregressive = WaveFunction<M> && requires(const M& m, std::mt19937_64& rng) {
  { m.sample_direct(rng) } -> std::same_as<std::pair<DoubledConfiguration, cplx>>;
};

inline constexpr double kExactZeroTolerance = 64 * std::numeric_limits<double>::epsilon();

/// ln cosh z with an overflow-safe branch for |Re z| > 12. Numerically exact
/// zeros (cosh z below round-off) are reported as -inf real part.
inline cplx log_cosh(cplx z) {
  const double x = z.real();
  if (std::abs(x) > 12.0) {
    const cplx s = x > 0 ? z : -z;
    return s + std::log(1.0 + std::exp(-2.0 * s)) - std::log(2.0);
  }
  const cplx c = std::cosh(z);
  if (std::abs(c) <= kExactZeroTolerance * std::cosh(x)) return {kNegInf, 0.0};
  return std::log(c);
}

inline void require_finite(const VectorXc& theta) {
  NTFS_CHECK(theta.allFinite(), DomainError, "non-finite variational parameters");
}

inline void require_basis(const DoubledConfiguration& c, AuxBasis expected) {
  NTFS_CHECK(c.basis() == expected, BasisMismatch,
             "configuration basis does not match the ansatz");
}

}  // namespace ntfs
