// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/ansatz/model.hpp"

namespace ntfs {

/// Two-body Jastrow network on the doubled space:
///
///   ln psi = sum_i (c_i sigma_i + c'_i s_i)
///          + sum_{k<l} (J_kl sigma_k sigma_l + J'_kl s_k s_l) + sum_{k,l} K_kl sigma_k s_l.
///
/// Complex, holomorphic and nowhere zero. Layout: [c (N), c' (N), J (pairs),
/// J' (pairs), K (N x N row-major)] with pairs ordered (0,1), (0,2), ..., (N-2,N-1).
class PairJastrow {
 public:
  static constexpr bool holomorphic = true;

  explicit PairJastrow(int n_sites) : n_(n_sites) {
    NTFS_CHECK(n_sites >= 1 && n_sites <= kMaxSites, ContractViolation,
               "Jastrow site count out of range");
    theta_ = VectorXc::Zero(2 * n_ + 2 * pairs() + n_ * n_);
  }

  [[nodiscard]] int n_sites() const { return n_; }
  [[nodiscard]] Eigen::Index n_parameters() const { return theta_.size(); }
  [[nodiscard]] AuxBasis basis() const { return AuxBasis::Z; }
  [[nodiscard]] const VectorXc& parameters() const { return theta_; }

  void set_parameters(const VectorXc& theta) {
    NTFS_CHECK(theta.size() == theta_.size(), ContractViolation,
               "Jastrow parameter vector has wrong length");
    require_finite(theta);
    theta_ = theta;
  }

  [[nodiscard]] cplx log_amplitude(const DoubledConfiguration& c) const {
    return features(c).dot(theta_);
  }

  [[nodiscard]] VectorXc log_derivatives(const DoubledConfiguration& c) const {
    return features(c);
  }

  [[nodiscard]] AmplitudeGradient amplitude_gradient(const DoubledConfiguration& c) const {
    const VectorXc f = features(c);
    const cplx value = std::exp(f.dot(theta_));
    return {value, value * f};
  }

 private:
  [[nodiscard]] Eigen::Index pairs() const { return Eigen::Index{n_} * (n_ - 1) / 2; }

  /// ln psi is linear in the parameters; these are the coefficients.
  [[nodiscard]] VectorXc features(const DoubledConfiguration& c) const {
    require_basis(c, AuxBasis::Z);
    NTFS_CHECK(c.n_sites() == n_, ContractViolation, "configuration size mismatch");
    VectorXc f(n_parameters());
    Eigen::Index k = 0;
    for (int i = 0; i < n_; ++i) f[k++] = c.sigma(i);
    for (int i = 0; i < n_; ++i) f[k++] = c.aux(i);
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) f[k++] = c.sigma(i) * c.sigma(j);
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) f[k++] = c.aux(i) * c.aux(j);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) f[k++] = c.sigma(i) * c.aux(j);
    return f;
  }

  int n_;
  VectorXc theta_;
};

static_assert(WaveFunction<PairJastrow>);

}  // namespace ntfs
