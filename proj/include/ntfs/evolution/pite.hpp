// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/evolution/integrators.hpp"

#include <cmath>
#include <random>
#include <span>
#include <unordered_map>

namespace ntfs {

/// Projected imaginary-time evolution. Each step maximises the fidelity of
/// psi_eta with phi = Pi psi_theta, Pi = e^{-(dbeta/2) H} truncated at
/// `taylor_order`, estimated from samples of the prior q.
struct PiteConfig {
  double step = 0.005;  // dbeta; the purification advances by step / 2
  int n_samples = 2048;
  PriorConfig prior;
  int max_iterations = 500;
  double learning_rate = 0.1;
  double momentum = 0.9;
  double target_infidelity = 1e-6;
  // Iteration also continues until the infidelity falls below this fraction
  // of its value at the start of the step.
  double relative_target = 1e-4;
  double max_infidelity = 1e-4;
  int taylor_order = 2;
  bool enumerate = false;  // exact sums over all 4^N configurations
  // Metric-preconditioned updates (G + diag_shift)^-1 grad instead of plain
  // gradient steps.
  bool natural_gradient = true;
  double diag_shift = 1e-4;
  // Standard deviation of a random perturbation of the optimiser's starting
  // point. The identity is a stationary point of the fidelity in directions
  // that only contribute at second order, so plain descent cannot leave it.
  double kick = 1e-3;
};

struct PiteDiagnostics {
  double infidelity = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool reached_target = false;
};

/// Self-normalised fidelity |c|^2 / (a n) with c = sum w phi* psi,
/// n = sum w |psi|^2, a = sum w |phi|^2 and w = 1/q. Equals Re(A B) of the
/// two-ratio estimator and is exact when psi is proportional to phi.
inline double pite_fidelity(std::span<const cplx> phi, std::span<const cplx> psi,
                            std::span<const double> w) {
  cplx c{0.0, 0.0};
  double n = 0.0, a = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    c += w[j] * std::conj(phi[j]) * psi[j];
    n += w[j] * std::norm(psi[j]);
    a += w[j] * std::norm(phi[j]);
  }
  if (n <= 0.0 || a <= 0.0) return 0.0;
  return std::norm(c) / (a * n);
}

namespace detail {

/// Amplitudes psi(x) exp(-shift) with memoisation.
template <WaveFunction M>
class AmplitudeCache {
 public:
  AmplitudeCache(const M& model, double shift) : model_(model), shift_(shift) {}
  cplx operator()(const DoubledConfiguration& x) {
    auto it = memo_.find(x);
    if (it != memo_.end()) return it->second;
    const cplx l = model_.log_amplitude(x);
    const cplx v = is_zero_log(l) ? cplx{0.0, 0.0} : std::exp(l - shift_);
    memo_.emplace(x, v);
    return v;
  }

 private:
  const M& model_;
  double shift_;
  std::unordered_map<DoubledConfiguration, cplx, ConfigurationHash> memo_;
};

/// (H^k psi)(x) by nested row passes over the physical part of H.
template <class Amp>
cplx apply_power(const PauliOperator& H, const DoubledConfiguration& x, int k, Amp& amp) {
  if (k == 0) return amp(x);
  cplx out{0.0, 0.0};
  H.for_each_in_row(x.physical(), [&](std::uint64_t b, cplx h) {
    out += h * apply_power(H, x.with_physical(b), k - 1, amp);
  });
  return out;
}

}  // namespace detail

/// phi(x) = sum_k (-tau)^k / k! (H^k psi)(x), scaled by exp(-shift).
template <WaveFunction M>
std::vector<cplx> propagated_amplitudes(const M& model, const PauliOperator& H, double tau,
                                        int order, std::span<const DoubledConfiguration> xs,
                                        double shift) {
  NTFS_CHECK(order >= 0, ContractViolation, "Taylor order must be non-negative");
  detail::AmplitudeCache<M> amp(model, shift);
  std::vector<cplx> phi(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    cplx s{0.0, 0.0};
    double coeff = 1.0;
    for (int k = 0; k <= order; ++k) {
      if (k > 0) coeff *= -tau / k;
      s += coeff * detail::apply_power(H, xs[j], k, amp);
    }
    phi[j] = s;
  }
  return phi;
}

/// Optimises the model in place so that it approximates Pi psi_theta.
template <WaveFunction M>
PiteDiagnostics pite_optimize(M& model, const PauliOperator& H0, const PiteConfig& cfg,
                              std::mt19937_64& rng) {
  NTFS_CHECK(model.basis() == AuxBasis::Z, BasisMismatch, "p-ITE runs in the AuxZ basis");
  NTFS_CHECK(cfg.step >= 0.0, ContractViolation, "p-ITE step must be non-negative");
  const int n = model.n_sites();
  SampleBatch batch;
  if (cfg.enumerate) {
    NTFS_CHECK(n <= kMaxEnumerationSites, CapacityError, "enumeration limited to N <= 12");
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    batch.source = SampleSource::Enumeration;
    for (std::uint64_t i = 0; i < count; ++i)
      batch.configs.push_back(DoubledConfiguration::from_index(n, i, AuxBasis::Z));
    batch.weights = std::vector<double>(count, 1.0);
  } else {
    batch = sample_prior(cfg.prior, n, cfg.n_samples, rng);
  }
  std::vector<double> w = *batch.weights;
  const double wsum = [&] {
    double s = 0.0;
    for (double x : w) s += x;
    return s;
  }();
  for (double& x : w) x /= wsum;

  // Common scale from the current amplitudes keeps phi and psi near unity.
  double shift = kNegInf;
  for (const auto& x : batch.configs) shift = std::max(shift, model.log_amplitude(x).real());
  if (shift == kNegInf) shift = 0.0;
  const std::vector<cplx> phi =
      propagated_amplitudes(model, H0, 0.5 * cfg.step, cfg.taylor_order, batch.configs, shift);

  const Eigen::Index p = model.n_parameters();
  const std::size_t ns = batch.size();
  VectorXc eta = model.parameters();
  VectorXc best = eta;

  VectorXc velocity = VectorXc::Zero(p);
  PiteDiagnostics diag;
  diag.infidelity = std::numeric_limits<double>::infinity();
  double initial = -1.0;
  std::vector<cplx> psi(ns);
  MatrixXc dpsi(static_cast<Eigen::Index>(ns), p);

  for (int it = 0; it <= cfg.max_iterations; ++it) {
    model.set_parameters(eta);
    parallel_for(static_cast<int>(std::min<std::size_t>(ns, 64)), [&](int c) {
      for (std::size_t j = c; j < ns; j += std::min<std::size_t>(ns, 64)) {
        const AmplitudeGradient ag = model.amplitude_gradient(batch.configs[j]);
        const double scale = std::exp(-shift);
        psi[j] = ag.value * scale;
        dpsi.row(static_cast<Eigen::Index>(j)) = ag.gradient.transpose() * scale;
      }
    });
    cplx c{0.0, 0.0};
    double nn = 0.0, a = 0.0;
    VectorXc wphi(static_cast<Eigen::Index>(ns)), wpsi(static_cast<Eigen::Index>(ns));
    for (std::size_t j = 0; j < ns; ++j) {
      c += w[j] * std::conj(phi[j]) * psi[j];
      nn += w[j] * std::norm(psi[j]);
      a += w[j] * std::norm(phi[j]);
      wphi[static_cast<Eigen::Index>(j)] = w[j] * phi[j];
      wpsi[static_cast<Eigen::Index>(j)] = w[j] * psi[j];
    }
    NTFS_CHECK(nn > 0.0 && a > 0.0, DomainError, "p-ITE: vanishing state on the sample set");
    const double fid = std::norm(c) / (a * nn);
    const double infid = std::max(0.0, 1.0 - fid);
    diag.iterations = it;
    if (infid < diag.infidelity) {
      diag.infidelity = infid;
      best = eta;
    }
    if (initial < 0.0) initial = infid;
    if ((infid < cfg.target_infidelity && infid <= cfg.relative_target * initial) ||
        it == cfg.max_iterations)
      break;
    if (std::abs(c) == 0.0) break;
    // dF / d eta*
    const VectorXc g = fid * (dpsi.adjoint() * wphi / std::conj(c) - dpsi.adjoint() * wpsi / nn);
    VectorXc dir = M::holomorphic ? VectorXc(2.0 * g) : VectorXc((2.0 * g.real()).cast<cplx>());
    if (cfg.natural_gradient) {
      const Eigen::Map<const VectorXd> wv(w.data(), static_cast<Eigen::Index>(ns));
      const VectorXc o = dpsi.adjoint() * wpsi / nn;
      MatrixXc G = dpsi.adjoint() * (wv.cast<cplx>().asDiagonal() * dpsi) / nn - o * o.adjoint();
      if (M::holomorphic) {
        G.diagonal().array() += cfg.diag_shift;
        dir = G.ldlt().solve(dir);
      } else {
        MatrixXd Gr = G.real();
        Gr.diagonal().array() += cfg.diag_shift;
        dir = Gr.ldlt().solve(dir.real()).cast<cplx>();
      }
    }
    diag.gradient_norm = dir.norm();
    velocity = cfg.momentum * velocity + cfg.learning_rate * dir;
    eta += velocity;
    if (it == 0 && cfg.kick > 0.0) {
      std::normal_distribution<double> kick(0.0, cfg.kick);
      for (auto& e : eta) e += M::holomorphic ? cplx{kick(rng), kick(rng)} : cplx{kick(rng), 0.0};
    }
  }
  diag.reached_target = diag.infidelity < cfg.target_infidelity;
  model.set_parameters(best);
  return diag;
}

/// p-ITE step on C1. Accepts the best iterate if its estimated infidelity is
/// within `max_infidelity`; otherwise the state is left unchanged and the
/// step fails.
inline PiteDiagnostics pite_step(EvolutionState& es, const PauliOperator& H0,
                                 const PiteConfig& cfg, std::mt19937_64& rng) {
  NTFS_CHECK(es.segment == Segment::C1_pite, ContractViolation, "pite_step outside segment C1");
  VariationalState trial = es.state;
  const PiteDiagnostics d = trial.visit([&](auto& m) { return pite_optimize(m, H0, cfg, rng); });
  if (d.infidelity > cfg.max_infidelity)
    throw EvolutionFailure("p-ITE step failed: infidelity " + std::to_string(d.infidelity) +
                           ", gradient norm " + std::to_string(d.gradient_norm) + " after " +
                           std::to_string(d.iterations) + " iterations");
  es.state = std::move(trial);
  es.beta += cfg.step;
  ++es.step;
  return d;
}

}  // namespace ntfs
