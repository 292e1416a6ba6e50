// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/ansatz/model.hpp"

#include <vector>

namespace ntfs {

/// Restricted Boltzmann machine operator on the doubled space:
///
///   ln psi(sigma, s) = sum_i (a_i sigma_i + a'_i s_i)
///                    + sum_m ln cosh(b_m + sum_j W_mj sigma_j + W'_mj s_j).
///
/// All parameters are complex and the model is holomorphic. Parameter layout:
/// [a (N), a' (N), b (M), W (M x N row-major), W' (M x N row-major)].
class Rbmo {
 public:
  static constexpr bool holomorphic = true;

  Rbmo(int n_sites, int n_hidden)
      : n_(n_sites), m_(n_hidden),
        theta_(VectorXc::Zero(2 * n_sites + n_hidden + 2 * n_hidden * n_sites)) {
    NTFS_CHECK(n_sites >= 1 && n_sites <= kMaxSites, ContractViolation,
               "RBMO site count out of range");
    NTFS_CHECK(n_hidden >= 1, ContractViolation, "RBMO needs hidden units");
  }

  [[nodiscard]] int n_sites() const { return n_; }
  [[nodiscard]] int n_hidden() const { return m_; }
  [[nodiscard]] Eigen::Index n_parameters() const { return theta_.size(); }
  [[nodiscard]] AuxBasis basis() const { return AuxBasis::Z; }
  [[nodiscard]] const VectorXc& parameters() const { return theta_; }

  void set_parameters(const VectorXc& theta) {
    NTFS_CHECK(theta.size() == theta_.size(), ContractViolation,
               "RBMO parameter vector has wrong length");
    require_finite(theta);
    theta_ = theta;
  }

  // Offsets into the flat parameter vector.
  [[nodiscard]] Eigen::Index offset_a() const { return 0; }
  [[nodiscard]] Eigen::Index offset_a_aux() const { return n_; }
  [[nodiscard]] Eigen::Index offset_b() const { return 2 * n_; }
  [[nodiscard]] Eigen::Index offset_w() const { return 2 * n_ + m_; }
  [[nodiscard]] Eigen::Index offset_w_aux() const { return 2 * n_ + m_ + m_ * n_; }

  using ConstRowMap =
      Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  [[nodiscard]] Eigen::VectorBlock<const VectorXc> a() const {
    return theta_.segment(offset_a(), n_);
  }
  [[nodiscard]] Eigen::VectorBlock<const VectorXc> a_aux() const {
    return theta_.segment(offset_a_aux(), n_);
  }
  [[nodiscard]] Eigen::VectorBlock<const VectorXc> b() const {
    return theta_.segment(offset_b(), m_);
  }
  [[nodiscard]] ConstRowMap w() const { return {theta_.data() + offset_w(), m_, n_}; }
  [[nodiscard]] ConstRowMap w_aux() const { return {theta_.data() + offset_w_aux(), m_, n_}; }

  [[nodiscard]] cplx log_amplitude(const DoubledConfiguration& c) const {
    require_basis(c, AuxBasis::Z);
    const auto [sigma, s] = spins(c);
    cplx out = sigma.cast<cplx>().dot(a()) + s.cast<cplx>().dot(a_aux());
    const VectorXc arg = angles(sigma, s);
    for (Eigen::Index m = 0; m < m_; ++m) out += log_cosh(arg[m]);
    return out;
  }

  [[nodiscard]] VectorXc log_derivatives(const DoubledConfiguration& c) const {
    require_basis(c, AuxBasis::Z);
    const auto [sigma, s] = spins(c);
    const VectorXc arg = angles(sigma, s);
    VectorXc t(m_);
    for (Eigen::Index m = 0; m < m_; ++m) {
      NTFS_CHECK(!is_zero_log(log_cosh(arg[m])), DomainError,
                 "log-derivative requested at an exact zero of the RBMO");
      t[m] = std::tanh(arg[m]);
    }
    VectorXc o(n_parameters());
    o.segment(offset_a(), n_) = sigma.cast<cplx>();
    o.segment(offset_a_aux(), n_) = s.cast<cplx>();
    o.segment(offset_b(), m_) = t;
    fill_outer(o, t, sigma, s);
    return o;
  }

  [[nodiscard]] AmplitudeGradient amplitude_gradient(const DoubledConfiguration& c) const {
    require_basis(c, AuxBasis::Z);
    const auto [sigma, s] = spins(c);
    const VectorXc arg = angles(sigma, s);
    cplx log_rest = sigma.cast<cplx>().dot(a()) + s.cast<cplx>().dot(a_aux());
    int zero_unit = -1;
    int n_zero = 0;
    for (Eigen::Index m = 0; m < m_; ++m) {
      const cplx lc = log_cosh(arg[m]);
      if (is_zero_log(lc)) {
        ++n_zero;
        zero_unit = static_cast<int>(m);
      } else {
        log_rest += lc;
      }
    }
    AmplitudeGradient g{{0.0, 0.0}, VectorXc::Zero(n_parameters())};
    if (n_zero == 0) {
      g.value = std::exp(log_rest);
      g.gradient = g.value * log_derivatives(c);
    } else if (n_zero == 1) {
      // Only the vanishing factor's own parameters move psi off zero.
      VectorXc t = VectorXc::Zero(m_);
      t[zero_unit] = std::exp(log_rest) * std::sinh(arg[zero_unit]);
      g.gradient.segment(offset_b(), m_) = t;
      fill_outer(g.gradient, t, sigma, s);
    }
    return g;
  }

  /// Exact identity state: a = a' = b = 0, W_ii = -W'_ii = i pi / 4; hidden
  /// units beyond the first N carry zero weights.
  static Rbmo identity(int n_sites, int alpha = 1) {
    NTFS_CHECK(alpha >= 1, ContractViolation, "RBMO hidden density must be >= 1");
    Rbmo r(n_sites, alpha * n_sites);
    const cplx w{0.0, kPi / 4.0};
    for (int i = 0; i < n_sites; ++i) {
      r.theta_[r.offset_w() + i * n_sites + i] = w;
      r.theta_[r.offset_w_aux() + i * n_sites + i] = -w;
    }
    return r;
  }

 private:
  [[nodiscard]] std::pair<VectorXd, VectorXd> spins(const DoubledConfiguration& c) const {
    NTFS_CHECK(c.n_sites() == n_, ContractViolation, "configuration size mismatch");
    VectorXd sigma(n_), s(n_);
    for (int i = 0; i < n_; ++i) {
      sigma[i] = c.sigma(i);
      s[i] = c.aux(i);
    }
    return {sigma, s};
  }

  [[nodiscard]] VectorXc angles(const VectorXd& sigma, const VectorXd& s) const {
    return b() + w() * sigma.cast<cplx>() + w_aux() * s.cast<cplx>();
  }

  void fill_outer(VectorXc& o, const VectorXc& t, const VectorXd& sigma,
                  const VectorXd& s) const {
    Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        o.data() + offset_w(), m_, n_) = t * sigma.cast<cplx>().transpose();
    Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        o.data() + offset_w_aux(), m_, n_) = t * s.cast<cplx>().transpose();
  }

  int n_;
  int m_;
  VectorXc theta_;
};

static_assert(WaveFunction<Rbmo>);

}  // namespace ntfs
