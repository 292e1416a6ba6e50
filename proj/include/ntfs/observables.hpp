// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/ansatz/model.hpp"
#include "ntfs/lattice.hpp"
#include "ntfs/parallel.hpp"
#include "ntfs/sampling.hpp"
#include "ntfs/statistics.hpp"

#include <string>
#include <vector>

namespace ntfs {

enum class Reduction { single_pair, bond_average, site_average };
enum class CorrelatorMode { bond_average, single_pair };

inline std::string to_string(CorrelatorMode m) {
  return m == CorrelatorMode::bond_average ? "bond_average" : "single_pair";
}

/// Physical observable. `op` already contains the reduction (for example the
/// bond-averaged ZZ is (1/N_b) sum_<ij> Z_i Z_j).
struct ObservableSpec {
  std::string name;
  PauliOperator op;
  Reduction reduction = Reduction::site_average;
};

/// ZZ and YY on nearest neighbours, X per site and energy per site of H.
/// The total energy is N times the last entry.
inline std::vector<ObservableSpec> standard_observable_suite(
    const Lattice& lattice, const PauliOperator& H,
    CorrelatorMode mode = CorrelatorMode::bond_average) {
  const int n = lattice.n_sites();
  NTFS_CHECK(H.n_sites() == n, ContractViolation, "Hamiltonian and lattice sizes differ");
  NTFS_CHECK(!lattice.edges.empty(), InvalidGeometry, "lattice has no bonds");
  PauliOperator zz(n), yy(n), x(n);
  if (mode == CorrelatorMode::single_pair) {
    zz.add(1.0, {{0, Pauli::Z}, {1, Pauli::Z}});
    yy.add(1.0, {{0, Pauli::Y}, {1, Pauli::Y}});
  } else {
    const double w = 1.0 / static_cast<double>(lattice.edges.size());
    for (auto [i, j] : lattice.edges) {
      zz.add(w, {{i, Pauli::Z}, {j, Pauli::Z}});
      yy.add(w, {{i, Pauli::Y}, {j, Pauli::Y}});
    }
  }
  for (int i = 0; i < n; ++i) x.add(1.0 / n, {{i, Pauli::X}});
  const Reduction pair = mode == CorrelatorMode::single_pair ? Reduction::single_pair
                                                             : Reduction::bond_average;
  return {{"ZZ", zz, pair},
          {"YY", yy, pair},
          {"X", x, Reduction::site_average},
          {"energy_per_site", cplx(1.0 / n) * H, Reduction::site_average}};
}

/// sum_{sigma'} <sigma|O|sigma'> psi(sigma', s) / psi(sigma, s).
template <WaveFunction M>
cplx local_value(const M& model, const PauliOperator& op, const DoubledConfiguration& x,
                 cplx log_psi) {
  NTFS_CHECK(!is_zero_log(log_psi), DomainError, "local value at a zero-amplitude sample");
  cplx out{0.0, 0.0};
  op.for_each_in_row(x.physical(), [&](std::uint64_t b, cplx amp) {
    if (b == x.physical()) {
      out += amp;
      return;
    }
    out += amp * amplitude_ratio(model.log_amplitude(x.with_physical(b)), log_psi);
  });
  return out;
}

/// Thermal expectation of a physical operator from a Born or enumeration
/// batch. Zero-amplitude samples are skipped and counted in `skipped`.
template <WaveFunction M>
EstimatorResult estimate(const M& model, const ObservableSpec& spec, const SampleBatch& batch,
                         long* skipped = nullptr) {
  NTFS_CHECK(spec.op.n_sites() == model.n_sites(), ContractViolation,
             "observable and state sizes differ");
  const std::size_t n = batch.size();
  std::vector<cplx> values(n);
  std::vector<char> valid(n, 1);
  const int chunks = std::max(1, std::min<int>(static_cast<int>(n), 64));
  parallel_for(chunks, [&](int c) {
    for (std::size_t i = c; i < n; i += static_cast<std::size_t>(chunks)) {
      if (batch.weights && batch.source == SampleSource::Enumeration && (*batch.weights)[i] == 0.0) {
        valid[i] = 0;
        continue;
      }
      const cplx lp = batch.log_amplitudes.empty() ? model.log_amplitude(batch.configs[i])
                                                   : batch.log_amplitudes[i];
      if (is_zero_log(lp)) {
        valid[i] = 0;
        continue;
      }
      values[i] = local_value(model, spec.op, batch.configs[i], lp);
    }
  });
  if (skipped) {
    *skipped = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (!valid[i] && batch.source != SampleSource::Enumeration) ++*skipped;
  }
  return summarize(values, batch, valid);
}

}  // namespace ntfs
