// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/observables.hpp"
#include "ntfs/oracles/ed.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <random>
#include <vector>

namespace ntfs {

struct MettsConfig {
  int n_samples = 10000;
  int discard = 100;
  double rtol = 1e-8;
  double atol = 1e-10;
};

/// Raw measurements, one row per retained sample and one column per spec.
struct MettsResult {
  std::vector<std::vector<double>> samples;
  double max_norm_drift = 0.0;
  long ode_steps = 0;
};

namespace detail {

/// Walsh-Hadamard transform on all sites, in place; H^(x)N is its own inverse.
inline void hadamard_all(VectorXc& v) {
  const Eigen::Index dim = v.size();
  for (Eigen::Index h = 1; h < dim; h <<= 1)
    for (Eigen::Index i = 0; i < dim; i += 2 * h)
      for (Eigen::Index j = i; j < i + h; ++j) {
        const cplx a = v[j], b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
  v *= std::pow(0.5, 0.5 * std::log2(static_cast<double>(dim)));
}

}  // namespace detail

/// Minimally entangled typical thermal states. Starting from the all-up
/// product state, each step evolves to tau = beta/2 under the normalised flow
/// d phi / d tau = -(H - E) phi, measures the specs, then collapses onto a
/// product state alternately in the Z and X bases.
inline MettsResult metts_run(const PauliOperator& H, double beta,
                             const std::vector<ObservableSpec>& specs, const MettsConfig& cfg,
                             std::mt19937_64& rng) {
  namespace odeint = boost::numeric::odeint;
  const int n = H.n_sites();
  NTFS_CHECK(n <= kMaxDenseVectorSites, CapacityError, "METTS limited to N <= 12");
  NTFS_CHECK(beta >= 0.0, ContractViolation, "beta must be non-negative");
  const Eigen::Index dim = Eigen::Index{1} << n;
  using State = std::vector<cplx>;

  auto rhs = [&](const State& phi, State& dphi, double) {
    const Eigen::Map<const VectorXc> v(phi.data(), dim);
    Eigen::Map<VectorXc> dv(dphi.data(), dim);
    const VectorXc hv = apply_operator(H, v);
    const cplx e = v.dot(hv) / v.squaredNorm();
    dv = -(hv - e * v);
  };

  MettsResult out;
  VectorXc seed = VectorXc::Zero(dim);
  seed[0] = 1.0;
  bool collapse_x = false;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int total = cfg.n_samples + cfg.discard;
  for (int step = 0; step < total; ++step) {
    State phi(seed.data(), seed.data() + dim);
    if (beta > 0.0) {
      auto stepper = odeint::make_controlled(cfg.atol, cfg.rtol,
                                             odeint::runge_kutta_dopri5<State>());
      out.ode_steps += static_cast<long>(
          odeint::integrate_adaptive(stepper, rhs, phi, 0.0, 0.5 * beta, 0.01 * beta));
    }
    VectorXc v = Eigen::Map<VectorXc>(phi.data(), dim);
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(v.norm() - 1.0));
    v.normalize();
    if (step >= cfg.discard) {
      std::vector<double> row;
      for (const auto& s : specs) row.push_back(expectation(v, s.op).real());
      out.samples.push_back(std::move(row));
    }
    // Collapse onto a product state in the current basis.
    if (collapse_x) detail::hadamard_all(v);
    const double u = uni(rng);
    double acc = 0.0;
    Eigen::Index pick = dim - 1;
    for (Eigen::Index k = 0; k < dim; ++k) {
      acc += std::norm(v[k]);
      if (u < acc) {
        pick = k;
        break;
      }
    }
    seed = VectorXc::Zero(dim);
    seed[pick] = 1.0;
    if (collapse_x) detail::hadamard_all(seed);
    collapse_x = !collapse_x;
  }
  return out;
}

}  // namespace ntfs
