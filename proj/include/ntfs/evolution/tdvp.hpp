// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/ansatz/model.hpp"
#include "ntfs/parallel.hpp"
#include "ntfs/sampling.hpp"
#include "ntfs/thermofield.hpp"

#include <Eigen/Eigenvalues>

#include <string>
#include <unordered_map>
#include <vector>

namespace ntfs {

/// sum_{x'} <x|Op|x'> psi(x') / psi(x) on the doubled space. The operator
/// must be written in the configuration's auxiliary basis.
template <WaveFunction M>
cplx local_energy(const M& model, const DoubledConfiguration& x, cplx log_psi,
                  const ThermofieldOperator& op) {
  NTFS_CHECK(!is_zero_log(log_psi), DomainError, "local energy at a zero-amplitude config");
  cplx out{0.0, 0.0};
  for_each_in_row(op, x, [&](const DoubledConfiguration& y, cplx amp) {
    if (y == x) out += amp;
    else out += amp * amplitude_ratio(model.log_amplitude(y), log_psi);
  });
  return out;
}

template <WaveFunction M>
cplx local_energy(const M& model, const DoubledConfiguration& x, const ThermofieldOperator& op) {
  return local_energy(model, x, model.log_amplitude(x), op);
}

/// Centered covariances of the log-derivatives (G) and of the log-derivatives
/// with the local energy (F), with the mean local energy.
struct QgtForces {
  MatrixXc G;
  /// sqrt(w)-weighted centered log-derivatives, so that G = Ow^H Ow.
  MatrixXc Ow;
  VectorXc F;
  cplx energy{0.0, 0.0};
  double energy_variance = 0.0;
  double mean_abs_local_energy = 0.0;
  long n_samples = 0;
  long n_unique = 0;
  double force_snr = 0.0;
  std::vector<std::string> warnings;
};

/// Which part of G to form. Real-parameter flows only need Re(G), which
/// costs half as much.
enum class QgtPart { full, real };

/// QGT and forces from a Born batch (duplicates merged) or an enumeration
/// batch (exact weights). With QgtPart::real the imaginary part of G is left
/// at zero.
template <WaveFunction M>
QgtForces estimate_qgt_forces(const M& model, const SampleBatch& batch,
                              const ThermofieldOperator& op, QgtPart part = QgtPart::full) {
  NTFS_CHECK(batch.source != SampleSource::PriorQ, ContractViolation,
             "QGT needs a Born or enumeration batch");
  const ThermofieldOperator h = in_basis(op, model.basis());

  // Unique configurations with their probability weights.
  std::vector<std::size_t> rep;
  std::vector<double> w;
  if (batch.source == SampleSource::Enumeration) {
    for (std::size_t i = 0; i < batch.size(); ++i)
      if ((*batch.weights)[i] > 0.0) {
        rep.push_back(i);
        w.push_back((*batch.weights)[i]);
      }
  } else {
    std::unordered_map<DoubledConfiguration, std::size_t, ConfigurationHash> seen;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      auto [it, fresh] = seen.try_emplace(batch.configs[i], rep.size());
      if (fresh) {
        rep.push_back(i);
        w.push_back(1.0);
      } else {
        w[it->second] += 1.0;
      }
    }
    for (double& x : w) x /= static_cast<double>(batch.size());
  }
  const auto u = static_cast<Eigen::Index>(rep.size());
  NTFS_CHECK(u > 0, DomainError, "empty sample batch");
  const Eigen::Index p = model.n_parameters();

  MatrixXc O(u, p);
  VectorXc E(u);
  parallel_for(static_cast<int>(std::min<Eigen::Index>(u, 64)), [&](int c) {
    for (Eigen::Index r = c; r < u; r += std::min<Eigen::Index>(u, 64)) {
      const auto& x = batch.configs[rep[static_cast<std::size_t>(r)]];
      const cplx lp = batch.log_amplitudes.empty() ? model.log_amplitude(x)
                                                   : batch.log_amplitudes[rep[static_cast<std::size_t>(r)]];
      O.row(r) = model.log_derivatives(x).transpose();
      E[r] = local_energy(model, x, lp, h);
    }
  });

  const Eigen::Map<const VectorXd> wv(w.data(), u);
  QgtForces out;
  out.n_samples = static_cast<long>(batch.size());
  out.n_unique = static_cast<long>(u);
  out.energy = (wv.cast<cplx>().array() * E.array()).sum();
  out.mean_abs_local_energy = (wv.array() * E.array().abs()).sum();
  out.energy_variance = (wv.array() * (E.array() - out.energy).abs2()).sum();
  const VectorXc o_mean = O.transpose() * wv.cast<cplx>();
  O.rowwise() -= o_mean.transpose();
  const VectorXd sw = wv.array().sqrt();
  out.Ow = sw.cast<cplx>().asDiagonal() * O;
  const MatrixXc& Ow = out.Ow;
  if (part == QgtPart::full) {
    out.G = Ow.adjoint() * Ow;
  } else {
    const MatrixXd re = Ow.real(), im = Ow.imag();
    MatrixXd g = MatrixXd::Zero(p, p);
    g.selfadjointView<Eigen::Lower>().rankUpdate(re.transpose());
    g.selfadjointView<Eigen::Lower>().rankUpdate(im.transpose());
    out.G = MatrixXd(g.selfadjointView<Eigen::Lower>()).cast<cplx>();
  }
  const VectorXc Ec = E.array() - out.energy;
  out.F = O.adjoint() * (wv.cast<cplx>().array() * Ec.array()).matrix();

  if (batch.source != SampleSource::Enumeration) {
    // Per-component variance of the force estimator, for a signal-to-noise ratio.
    const double n = static_cast<double>(batch.size());
    double noise = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      double second = 0.0;
      for (Eigen::Index r = 0; r < u; ++r) second += w[static_cast<std::size_t>(r)] *
                                                     std::norm(std::conj(O(r, k)) * Ec[r]);
      noise += std::max(0.0, second - std::norm(out.F[k])) / n;
    }
    out.force_snr = noise > 0.0 ? out.F.norm() / std::sqrt(noise) : 0.0;
    if (out.n_samples < p)
      out.warnings.push_back("fewer samples than parameters; QGT is rank deficient");
  }
  return out;
}

struct SolveResult {
  VectorXc x;
  int n_kept = 0;
  double min_kept = 0.0;
  double max_eigenvalue = 0.0;
  double min_eigenvalue = 0.0;
  bool all_cut = false;
};

/// Pseudo-inverse solve of a Hermitian system. Eigenvalues below `atol`, or
/// below `rcond` times the largest eigenvalue, are discarded.
inline SolveResult solve_regularized(const MatrixXc& G, const VectorXc& rhs, double atol,
                                     double rcond = 0.0) {
  NTFS_CHECK(G.rows() == G.cols() && G.rows() == rhs.size(), ContractViolation,
             "solve_regularized: dimension mismatch");
  NTFS_CHECK(atol > 0.0, ContractViolation, "svd cutoff must be positive");
  SolveResult r;
  r.x = VectorXc::Zero(rhs.size());
  if (rhs.size() == 0) return r;
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(G);
  const VectorXd& ev = es.eigenvalues();
  r.max_eigenvalue = ev.maxCoeff();
  r.min_eigenvalue = ev.minCoeff();
  const double cut = std::max(atol, rcond * r.max_eigenvalue);
  const VectorXc proj = es.eigenvectors().adjoint() * rhs;
  VectorXc scaled = VectorXc::Zero(rhs.size());
  r.min_kept = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev[k] < cut) continue;
    scaled[k] = proj[k] / ev[k];
    ++r.n_kept;
    r.min_kept = std::min(r.min_kept, ev[k]);
  }
  r.all_cut = r.n_kept == 0;
  if (r.all_cut) r.min_kept = 0.0;
  r.x = es.eigenvectors() * scaled;
  return r;
}

/// Real symmetric counterpart used for real-parameter models.
inline SolveResult solve_regularized_real(const MatrixXd& G, const VectorXd& rhs, double atol,
                                          double rcond = 0.0) {
  NTFS_CHECK(G.rows() == G.cols() && G.rows() == rhs.size(), ContractViolation,
             "solve_regularized: dimension mismatch");
  NTFS_CHECK(atol > 0.0, ContractViolation, "svd cutoff must be positive");
  SolveResult r;
  r.x = VectorXc::Zero(rhs.size());
  if (rhs.size() == 0) return r;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(G);
  const VectorXd& ev = es.eigenvalues();
  r.max_eigenvalue = ev.maxCoeff();
  r.min_eigenvalue = ev.minCoeff();
  const double cut = std::max(atol, rcond * r.max_eigenvalue);
  const VectorXd proj = es.eigenvectors().transpose() * rhs;
  VectorXd scaled = VectorXd::Zero(rhs.size());
  r.min_kept = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev[k] < cut) continue;
    scaled[k] = proj[k] / ev[k];
    ++r.n_kept;
    r.min_kept = std::min(r.min_kept, ev[k]);
  }
  r.all_cut = r.n_kept == 0;
  if (r.all_cut) r.min_kept = 0.0;
  r.x = (es.eigenvectors() * scaled).cast<cplx>();
  return r;
}

/// Same pseudo-inverse as solve_regularized for G = A^H A, computed from the
/// eigenpairs of the smaller Gram matrix A A^H. Used when A has fewer rows than
/// columns.
template <class Mat, class Vec>
SolveResult solve_regularized_gram(const Mat& A, const Vec& rhs, double atol, double rcond = 0.0) {
  NTFS_CHECK(A.cols() == rhs.size(), ContractViolation, "solve_regularized: dimension mismatch");
  NTFS_CHECK(atol > 0.0, ContractViolation, "svd cutoff must be positive");
  SolveResult r;
  r.x = VectorXc::Zero(rhs.size());
  if (rhs.size() == 0 || A.rows() == 0) {
    r.all_cut = true;
    return r;
  }
  const Mat K = A * A.adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> es(K);
  const VectorXd& ev = es.eigenvalues();
  r.max_eigenvalue = std::max(0.0, ev.maxCoeff());
  r.min_eigenvalue = A.rows() < A.cols() ? 0.0 : ev.minCoeff();
  const double cut = std::max(atol, rcond * r.max_eigenvalue);
  // Right singular vectors v_k = A^H u_k / sqrt(lambda_k).
  const Vec a_rhs = A * rhs;
  Vec coeff = Vec::Zero(ev.size());
  r.min_kept = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev[k] < cut) continue;
    coeff[k] = es.eigenvectors().col(k).dot(a_rhs) / (ev[k] * ev[k]);
    ++r.n_kept;
    r.min_kept = std::min(r.min_kept, ev[k]);
  }
  r.all_cut = r.n_kept == 0;
  if (r.all_cut) r.min_kept = 0.0;
  const Vec x = A.adjoint() * (es.eigenvectors() * coeff);
  r.x = x.template cast<cplx>();
  return r;
}

enum class Flow { imaginary, real };

/// Parameter velocity from G and F. Imaginary time: G theta' = -F.
/// Real time: G theta' = -i F. Real-parameter models use Re(G) with
/// -Re(F) and Im(F) respectively.
inline SolveResult tdvp_velocity(const QgtForces& qf, bool holomorphic, Flow flow, double atol,
                                 double rcond = 0.0) {
  const cplx i{0.0, 1.0};
  const Eigen::Index p = qf.F.size();
  if (holomorphic) {
    const VectorXc rhs = flow == Flow::imaginary ? VectorXc(-qf.F) : VectorXc(-i * qf.F);
    if (qf.Ow.cols() == p && qf.Ow.rows() < p)
      return solve_regularized_gram(qf.Ow, rhs, atol, rcond);
    return solve_regularized(qf.G, rhs, atol, rcond);
  }
  const VectorXd rhs = flow == Flow::imaginary ? VectorXd(-qf.F.real()) : VectorXd(qf.F.imag());
  if (qf.Ow.cols() == p && 2 * qf.Ow.rows() < p) {
    MatrixXd A(2 * qf.Ow.rows(), p);
    A << qf.Ow.real(), qf.Ow.imag();
    return solve_regularized_gram(A, rhs, atol, rcond);
  }
  return solve_regularized_real(qf.G.real(), rhs, atol, rcond);
}

}  // namespace ntfs
