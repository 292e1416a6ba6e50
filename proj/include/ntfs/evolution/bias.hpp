// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/evolution/tdvp.hpp"

namespace ntfs {

/// Force bias from the zeros of psi, which Born sampling never visits:
///   B_k = sum_{x: psi(x) = 0} (d_k psi(x))* sum_{x'} <x|H (x) 1|x'> psi(x'),
/// normalised by sum |psi|^2 like the standard force.
struct BiasReport {
  VectorXc bias;
  VectorXc force;
  double bias_norm = 0.0;
  double force_norm = 0.0;
  long n_zeros = 0;
};

inline constexpr int kMaxBiasSites = 4;

template <WaveFunction M>
BiasReport bias_term_report(const M& model, const PauliOperator& H) {
  const int n = model.n_sites();
  NTFS_CHECK(n <= kMaxBiasSites, CapacityError, "bias report limited to N <= 4");
  const SampleBatch batch = enumerate_all(model);
  const ThermofieldOperator op = lift_physical(H);
  BiasReport r;
  r.force = estimate_qgt_forces(model, batch, op).F;
  r.bias = VectorXc::Zero(model.n_parameters());

  double norm = 0.0;
  for (const cplx& l : batch.log_amplitudes)
    if (!is_zero_log(l)) norm += std::exp(2.0 * l.real());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!is_zero_log(batch.log_amplitudes[i])) continue;
    ++r.n_zeros;
    const auto& x = batch.configs[i];
    cplx h_psi{0.0, 0.0};
    for_each_in_row(op, x, [&](const DoubledConfiguration& y, cplx amp) {
      const cplx l = model.log_amplitude(y);
      if (!is_zero_log(l)) h_psi += amp * std::exp(l);
    });
    if (h_psi == cplx{0.0, 0.0}) continue;
    r.bias += model.amplitude_gradient(x).gradient.conjugate() * h_psi;
  }
  r.bias /= norm;
  r.bias_norm = r.bias.norm();
  r.force_norm = r.force.norm();
  return r;
}

}  // namespace ntfs
