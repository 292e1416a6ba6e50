// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

// Reference constructions for tests. Everything here is built from 2x2
// matrices and Kronecker products, independent of the Pauli row iterators
// used by the library.

#pragma once

#include "ntfs/ansatz/model.hpp"
#include "ntfs/pauli.hpp"
#include "ntfs/thermofield.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <map>
#include <random>
#include <vector>

namespace ntfs::oracle {

inline MatrixXc pauli_matrix(Pauli p) {
  const cplx i{0.0, 1.0};
  MatrixXc m(2, 2);
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -i, i, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

/// Kronecker product with site i on bit i of the basis index, so the highest
/// site is the leftmost factor.
inline MatrixXc kron_sites(const std::vector<MatrixXc>& per_site) {
  MatrixXc out = MatrixXc::Identity(1, 1);
  for (const auto& m : per_site) out = Eigen::kroneckerProduct(m, out).eval();
  return out;
}

inline MatrixXc kron_dense(const PauliOperator& op) {
  const int n = op.n_sites();
  const auto dim = Eigen::Index{1} << n;
  MatrixXc out = MatrixXc::Zero(dim, dim);
  for (const auto& t : op.terms()) {
    std::vector<MatrixXc> f;
    for (int s = 0; s < n; ++s) f.push_back(pauli_matrix(t.at(s)));
    out += t.coefficient * kron_sites(f);
  }
  return out;
}

inline MatrixXc hadamard(int n) {
  MatrixXc h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  return kron_sites(std::vector<MatrixXc>(static_cast<std::size_t>(n), h));
}

/// Doubled-space matrix with the physical register on the high bits, matching
/// DoubledConfiguration::index().
inline MatrixXc doubled_dense(const ThermofieldOperator& op) {
  const int n = op.n_sites();
  const MatrixXc id = MatrixXc::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
  MatrixXc out = Eigen::kroneckerProduct(kron_dense(op.physical), id).eval();
  if (op.combination == Combination::difference)
    out -= Eigen::kroneckerProduct(id, kron_dense(op.auxiliary)).eval();
  return out;
}

/// H (x) 1 - 1 (x) conj(H), straight from the definition.
inline MatrixXc thermofield_dense(const PauliOperator& H) {
  const MatrixXc h = kron_dense(H);
  const MatrixXc id = MatrixXc::Identity(h.rows(), h.cols());
  return Eigen::kroneckerProduct(h, id).eval() - Eigen::kroneckerProduct(id, h.conjugate()).eval();
}

/// Identity purification sum_s |s>|s> in the AuxZ basis.
inline VectorXc identity_vector(int n) {
  const auto dim = Eigen::Index{1} << n;
  VectorXc v = VectorXc::Zero(dim * dim);
  for (Eigen::Index s = 0; s < dim; ++s) v[s * dim + s] = 1.0;
  return v;
}

/// Converts an AuxX-basis amplitude vector to the AuxZ basis.
inline VectorXc aux_x_to_z(const VectorXc& v, int n) {
  const auto dim = Eigen::Index{1} << n;
  const MatrixXc h = hadamard(n);
  // v is indexed (phys, aux); as a matrix M[phys][aux], the Z-basis matrix is M H^T.
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      v.data(), dim, dim);
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> z = m * h.transpose();
  return Eigen::Map<VectorXc>(z.data(), dim * dim);
}

/// All 4^N amplitudes of a model, in its own basis.
template <WaveFunction M>
VectorXc amplitudes(const M& model) {
  const int n = model.n_sites();
  const auto dim = Eigen::Index{1} << (2 * n);
  VectorXc v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const cplx lp = model.log_amplitude(
        DoubledConfiguration::from_index(n, static_cast<std::uint64_t>(k), model.basis()));
    v[k] = is_zero_log(lp) ? cplx{0.0, 0.0} : std::exp(lp);
  }
  return v;
}

/// Tr_aux |v><v| / <v|v> for an AuxZ-basis purification.
inline MatrixXc partial_trace(const VectorXc& v, int n) {
  const auto dim = Eigen::Index{1} << n;
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      v.data(), dim, dim);
  return (m * m.adjoint()) / v.squaredNorm();
}

/// exp(-beta H) / Z through the matrix exponential.
inline MatrixXc gibbs(const PauliOperator& H, double beta) {
  const MatrixXc e = (-beta * kron_dense(H)).exp();
  return e / e.trace();
}

/// Upper-tail chi-square p-value of observed counts against probabilities.
/// Bins with expected count below 5 are pooled.
inline double chi_square_pvalue(const std::map<std::uint64_t, long>& counts,
                                const std::map<std::uint64_t, double>& probs, long n) {
  double stat = 0.0;
  int dof = 0;
  double pooled_e = 0.0, pooled_o = 0.0;
  for (const auto& [k, p] : probs) {
    const double e = p * static_cast<double>(n);
    const auto it = counts.find(k);
    const double o = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    if (e < 5.0) {
      pooled_e += e;
      pooled_o += o;
      continue;
    }
    stat += (o - e) * (o - e) / e;
    ++dof;
  }
  if (pooled_e > 0.0) {
    stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    ++dof;
  }
  for (const auto& [k, c] : counts)
    if (!probs.count(k)) return 0.0;  // sample outside the support
  if (dof < 2) return 1.0;
  boost::math::chi_squared dist(dof - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Central finite difference of log psi along parameter k. Holomorphic models
/// are differentiated along the real axis; the imaginary part of the result is
/// unwrapped modulo 2 pi.
template <WaveFunction M>
cplx fd_log_derivative(M model, const DoubledConfiguration& c, Eigen::Index k, double h = 1e-6) {
  const VectorXc theta = model.parameters();
  VectorXc t = theta;
  t[k] += h;
  model.set_parameters(t);
  const cplx up = model.log_amplitude(c);
  t[k] = theta[k] - h;
  model.set_parameters(t);
  const cplx down = model.log_amplitude(c);
  cplx d = up - down;
  d = {d.real(), std::remainder(d.imag(), 2.0 * kPi)};
  return d / (2.0 * h);
}

/// Random parameter vector of the model's shape, complex for holomorphic
/// models and real otherwise.
template <WaveFunction M>
VectorXc random_parameters(const M& model, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, scale);
  VectorXc t(model.n_parameters());
  for (auto& x : t) x = M::holomorphic ? cplx{g(rng), g(rng)} : cplx{g(rng), 0.0};
  return t;
}

struct DenseQgt {
  MatrixXc G;
  VectorXc F;
};

/// G and F from dense vectors: |d_k psi> built column by column and the
/// doubled-space operator matrix.
inline DenseQgt dense_qgt(const VectorXc& psi, const MatrixXc& dpsi, const MatrixXc& Hd) {
  const double nn = psi.squaredNorm();
  const VectorXc ov = dpsi.adjoint() * psi / nn;  // <d_k psi|psi> / <psi|psi>
  const cplx e = psi.dot(Hd * psi) / nn;
  DenseQgt d;
  d.G = dpsi.adjoint() * dpsi / nn - ov * ov.adjoint();
  d.F = dpsi.adjoint() * (Hd * psi) / nn - ov * e;
  return d;
}

/// Columns d_k psi from central differences of log psi; zero rows at zeros of
/// psi, which Born sampling never visits.
template <WaveFunction M>
MatrixXc finite_difference_dpsi(const M& model) {
  const int n = model.n_sites();
  const VectorXc psi = amplitudes(model);
  MatrixXc d(psi.size(), model.n_parameters());
  for (Eigen::Index k = 0; k < psi.size(); ++k) {
    const auto c = DoubledConfiguration::from_index(n, static_cast<std::uint64_t>(k), model.basis());
    for (Eigen::Index j = 0; j < model.n_parameters(); ++j)
      d(k, j) = psi[k] == cplx{0.0, 0.0} ? cplx{0.0, 0.0}
                                         : psi[k] * fd_log_derivative(model, c, j, 1e-5);
  }
  return d;
}

}  // namespace ntfs::oracle
