// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/ansatz/model.hpp"
#include "ntfs/observables.hpp"
#include "ntfs/pauli.hpp"
#include "ntfs/sampling.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace ntfs {

inline constexpr int kMaxDenseVectorSites = 12;
inline constexpr int kMaxDenseMatrixSites = 10;

/// Dense matrix of a Pauli operator in the Z basis; basis index bit i is site i.
inline MatrixXc dense_matrix(const PauliOperator& op) {
  const int n = op.n_sites();
  NTFS_CHECK(n <= kMaxDenseVectorSites, CapacityError, "dense matrix limited to N <= 12");
  const std::uint64_t dim = std::uint64_t{1} << n;
  MatrixXc m = MatrixXc::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::uint64_t x = 0; x < dim; ++x)
    op.for_each_in_row(x, [&](std::uint64_t xp, cplx a) {
      m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(xp)) += a;
    });
  return m;
}

/// O|v> without forming the matrix.
inline VectorXc apply_operator(const PauliOperator& op, const VectorXc& v) {
  VectorXc out = VectorXc::Zero(v.size());
  for (Eigen::Index x = 0; x < v.size(); ++x)
    op.for_each_in_row(static_cast<std::uint64_t>(x), [&](std::uint64_t xp, cplx a) {
      out[x] += a * v[static_cast<Eigen::Index>(xp)];
    });
  return out;
}

/// Tr(rho O).
inline cplx expectation(const MatrixXc& rho, const PauliOperator& op) {
  cplx out{0.0, 0.0};
  for (Eigen::Index x = 0; x < rho.rows(); ++x)
    op.for_each_in_row(static_cast<std::uint64_t>(x), [&](std::uint64_t xp, cplx a) {
      out += a * rho(static_cast<Eigen::Index>(xp), x);
    });
  return out;
}

/// <v|O|v> / <v|v>.
inline cplx expectation(const VectorXc& v, const PauliOperator& op) {
  return v.dot(apply_operator(op, v)) / v.squaredNorm();
}

/// Dense density matrix. The eigenbasis of the generating Hamiltonian is kept
/// so that real-time evolution is diagonal.
struct DenseState {
  int n_sites = 0;
  MatrixXc rho;
};

/// e^{-beta H} / Z via dense eigendecomposition.
inline DenseState ed_thermal(const PauliOperator& H, double beta) {
  NTFS_CHECK(H.n_sites() <= kMaxDenseMatrixSites, CapacityError,
             "dense density matrices limited to N <= 10");
  NTFS_CHECK(beta >= 0.0, ContractViolation, "beta must be non-negative");
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(dense_matrix(H));
  const VectorXd& e = es.eigenvalues();
  VectorXd boltz = (-beta * (e.array() - e.minCoeff())).exp();
  boltz /= boltz.sum();
  DenseState s;
  s.n_sites = H.n_sites();
  s.rho = es.eigenvectors() * boltz.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  return s;
}

struct DenseSeriesRow {
  double t = 0.0;
  std::vector<double> values;  // real parts, one per spec
};

/// rho(t) = U rho U^dagger with U = e^{-i H_t t}, observables on a time grid.
inline std::vector<DenseSeriesRow> ed_evolve(const DenseState& initial, const PauliOperator& Ht,
                                             const std::vector<double>& t_grid,
                                             const std::vector<ObservableSpec>& specs) {
  NTFS_CHECK(Ht.n_sites() == initial.n_sites, ContractViolation, "size mismatch");
  NTFS_CHECK(Ht.n_sites() <= kMaxDenseMatrixSites, CapacityError,
             "dense density matrices limited to N <= 10");
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(dense_matrix(Ht));
  const MatrixXc& V = es.eigenvectors();
  const VectorXd& e = es.eigenvalues();
  const MatrixXc rho_e = V.adjoint() * initial.rho * V;
  std::vector<MatrixXc> ops_e;
  for (const auto& s : specs) ops_e.push_back(V.adjoint() * dense_matrix(s.op) * V);

  std::vector<DenseSeriesRow> rows;
  for (double t : t_grid) {
    MatrixXc rt = rho_e;
    for (Eigen::Index a = 0; a < rt.rows(); ++a)
      for (Eigen::Index b = 0; b < rt.cols(); ++b)
        rt(a, b) *= std::exp(cplx{0.0, -(e[a] - e[b]) * t});
    DenseSeriesRow row{t, {}};
    for (const auto& o : ops_e) row.values.push_back((rt.cwiseProduct(o.transpose())).sum().real());
    rows.push_back(std::move(row));
  }
  return rows;
}

/// rho at time t, for invariant checks.
inline DenseState ed_evolved_state(const DenseState& initial, const PauliOperator& Ht, double t) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(dense_matrix(Ht));
  const VectorXc phase = (es.eigenvalues().cast<cplx>() * cplx{0.0, -t}).array().exp();
  const MatrixXc U = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
  return {initial.n_sites, U * initial.rho * U.adjoint()};
}

/// Physical reduced density matrix Tr_aux |psi><psi| / <psi|psi> of an
/// enumerated purification, rho_{sigma sigma'} = sum_s psi(sigma, s) psi*(sigma', s).
template <WaveFunction M>
MatrixXc reduced_density_matrix(const M& model) {
  const int n = model.n_sites();
  NTFS_CHECK(n <= kMaxDenseMatrixSites, CapacityError, "partial trace limited to N <= 10");
  const Eigen::Index dim = Eigen::Index{1} << n;
  MatrixXc psi = MatrixXc::Zero(dim, dim);  // rows sigma, columns s
  double top = kNegInf;
  std::vector<cplx> logs(static_cast<std::size_t>(dim * dim));
  for (Eigen::Index idx = 0; idx < dim * dim; ++idx) {
    logs[static_cast<std::size_t>(idx)] = model.log_amplitude(
        DoubledConfiguration::from_index(n, static_cast<std::uint64_t>(idx), model.basis()));
    top = std::max(top, logs[static_cast<std::size_t>(idx)].real());
  }
  for (Eigen::Index idx = 0; idx < dim * dim; ++idx) {
    const cplx l = logs[static_cast<std::size_t>(idx)];
    if (!is_zero_log(l)) psi(idx >> n, idx & (dim - 1)) = std::exp(l - top);
  }
  MatrixXc rho = psi * psi.adjoint();
  return rho / rho.trace().real();
}

}  // namespace ntfs
