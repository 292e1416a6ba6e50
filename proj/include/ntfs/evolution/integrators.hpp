// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/ansatz/variational_state.hpp"
#include "ntfs/evolution/tdvp.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace ntfs {

enum class Segment { C1_pite, C2_sr, C3_tvmc };
enum class Integrator { Euler, RK2, RK4 };

inline std::string to_string(Segment s) {
  switch (s) {
    case Segment::C1_pite: return "C1_pite";
    case Segment::C2_sr: return "C2_sr";
    case Segment::C3_tvmc: return "C3_tvmc";
  }
  return "?";
}

inline Segment segment_from_string(const std::string& s) {
  if (s == "C1_pite") return Segment::C1_pite;
  if (s == "C2_sr") return Segment::C2_sr;
  if (s == "C3_tvmc") return Segment::C3_tvmc;
  throw SchemaError("unknown segment '" + s + "'");
}

inline std::string to_string(Integrator i) {
  switch (i) {
    case Integrator::Euler: return "Euler";
    case Integrator::RK2: return "RK2";
    case Integrator::RK4: return "RK4";
  }
  return "?";
}

inline Integrator integrator_from_string(const std::string& s) {
  if (s == "Euler") return Integrator::Euler;
  if (s == "RK2") return Integrator::RK2;
  if (s == "RK4") return Integrator::RK4;
  throw SchemaError("unknown integrator '" + s + "'");
}

/// Parameters plus position on the contour. `guard_reference` is the mean
/// |E_loc| of the last accepted step (negative before the first).
struct EvolutionState {
  VariationalState state;
  double beta = 0.0;
  double t = 0.0;
  Segment segment = Segment::C1_pite;
  long step = 0;
  double guard_reference = -1.0;
};

/// One TDVP segment. `step` is dbeta for imaginary time, so the purification
/// advances by step / 2, and dt for real time.
struct TdvpConfig {
  double step = 1e-3;
  Integrator integrator = Integrator::RK2;
  double svd_atol = 1e-7;
  double rcond = 0.0;
  SamplerSettings sampler;
  int max_retries = 4;
  double guard_factor = 10.0;
};

struct StepDiagnostics {
  cplx energy{0.0, 0.0};
  double energy_variance = 0.0;
  double acceptance_rate = 1.0;
  double force_snr = 0.0;
  double min_kept_eigenvalue = 0.0;
  int n_kept = 0;
  int rejections = 0;
  std::vector<std::string> warnings;
};

namespace detail {

/// Integrates theta over `interval` with the configured Runge-Kutta scheme.
/// A step is rejected when a stage's mean |E_loc| exceeds guard_factor times
/// the reference (with a floor set by the operator norm) or when parameters
/// become non-finite; rejected steps are retried as two half steps.
template <WaveFunction M>
bool rk_interval(M& model, const ThermofieldOperator& op, Flow flow, double interval,
                 const TdvpConfig& cfg, std::mt19937_64& rng, double& guard_ref, int depth,
                 StepDiagnostics& diag, bool first) {
  const double floor = 1e-3 * std::max(1e-12, [&] {
    double s = 0.0;
    for (const auto& t : op.physical.terms()) s += std::abs(t.coefficient);
    return s;
  }());
  M work = model;
  bool ok = true;
  double first_abs = -1.0;
  auto f = [&](const VectorXc& theta) -> VectorXc {
    work.set_parameters(theta);
    const SampleBatch batch = draw_samples(work, cfg.sampler, rng);
    const QgtForces qf = estimate_qgt_forces(work, batch, op,
                                             M::holomorphic ? QgtPart::full : QgtPart::real);
    const SolveResult sol = tdvp_velocity(qf, M::holomorphic, flow, cfg.svd_atol, cfg.rcond);
    if (guard_ref >= 0.0 &&
        qf.mean_abs_local_energy > cfg.guard_factor * std::max(guard_ref, floor))
      ok = false;
    if (first_abs < 0.0) {
      first_abs = qf.mean_abs_local_energy;
      if (first) {
        diag.energy = qf.energy;
        diag.energy_variance = qf.energy_variance;
        diag.acceptance_rate = batch.acceptance_rate;
        diag.force_snr = qf.force_snr;
        diag.min_kept_eigenvalue = sol.min_kept;
        diag.n_kept = sol.n_kept;
        for (const auto& w : batch.warnings) diag.warnings.push_back(w);
        for (const auto& w : qf.warnings) diag.warnings.push_back(w);
        if (sol.all_cut) diag.warnings.push_back("all QGT eigenvalues below cutoff");
      }
    }
    return sol.x;
  };

  const VectorXc theta0 = model.parameters();
  const double h = interval;
  VectorXc next;
  switch (cfg.integrator) {
    case Integrator::Euler:
      next = theta0 + h * f(theta0);
      break;
    case Integrator::RK2: {
      const VectorXc k1 = f(theta0);
      const VectorXc k2 = f(theta0 + h * k1);
      next = theta0 + 0.5 * h * (k1 + k2);
      break;
    }
    case Integrator::RK4: {
      const VectorXc k1 = f(theta0);
      const VectorXc k2 = f(theta0 + 0.5 * h * k1);
      const VectorXc k3 = f(theta0 + 0.5 * h * k2);
      const VectorXc k4 = f(theta0 + h * k3);
      next = theta0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      break;
    }
  }
  if (!next.allFinite()) ok = false;
  if (ok) {
    model.set_parameters(next);
    guard_ref = first_abs;
    return true;
  }
  ++diag.rejections;
  if (depth >= cfg.max_retries) return false;
  return rk_interval(model, op, flow, 0.5 * h, cfg, rng, guard_ref, depth + 1, diag, false) &&
         rk_interval(model, op, flow, 0.5 * h, cfg, rng, guard_ref, depth + 1, diag, false);
}

}  // namespace detail

/// Advances a model by `interval` of the TDVP flow generated by `op`.
template <WaveFunction M>
StepDiagnostics tdvp_advance(M& model, const ThermofieldOperator& op, Flow flow,
                             double interval, const TdvpConfig& cfg, std::mt19937_64& rng,
                             double& guard_ref) {
  NTFS_CHECK(interval >= 0.0, ContractViolation, "negative integration interval");
  StepDiagnostics diag;
  const M backup = model;
  const double ref_backup = guard_ref;
  if (!detail::rk_interval(model, op, flow, interval, cfg, rng, guard_ref, 0, diag, true)) {
    model = backup;
    guard_ref = ref_backup;
    throw EvolutionFailure("TDVP step rejected after " + std::to_string(diag.rejections) +
                           " retries (local-energy guard or non-finite parameters)");
  }
  return diag;
}

/// Imaginary-time SR step on C2: purification time advances by dbeta/2 and
/// beta by dbeta.
inline StepDiagnostics sr_step(EvolutionState& es, const PauliOperator& H0,
                               const TdvpConfig& cfg, std::mt19937_64& rng) {
  NTFS_CHECK(es.segment == Segment::C2_sr, ContractViolation, "sr_step outside segment C2");
  NTFS_CHECK(cfg.step > 0.0, ContractViolation, "step must be positive");
  const ThermofieldOperator op = lift_physical(H0);
  StepDiagnostics d = es.state.visit([&](auto& m) {
    return tdvp_advance(m, op, Flow::imaginary, 0.5 * cfg.step, cfg, rng, es.guard_reference);
  });
  es.beta += cfg.step;
  ++es.step;
  return d;
}

/// Real-time t-VMC step on C3 under H_t (x) 1 - 1 (x) H_t~, rotated to the
/// state's auxiliary basis.
inline StepDiagnostics tvmc_step(EvolutionState& es, const PauliOperator& Ht,
                                 const TdvpConfig& cfg, std::mt19937_64& rng) {
  NTFS_CHECK(es.segment == Segment::C3_tvmc, ContractViolation, "tvmc_step outside segment C3");
  NTFS_CHECK(cfg.step > 0.0, ContractViolation, "step must be positive");
  const ThermofieldOperator op = in_basis(thermofield_hamiltonian(Ht), es.state.basis());
  StepDiagnostics d = es.state.visit([&](auto& m) {
    return tdvp_advance(m, op, Flow::real, cfg.step, cfg, rng, es.guard_reference);
  });
  es.t += cfg.step;
  ++es.step;
  return d;
}

}  // namespace ntfs
