// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/ansatz/model.hpp"

#include <utility>

namespace ntfs {

/// Wraps a network with a per-site mean-field factor,
///
///   psi(sigma, s) = net(sigma, s) prod_i m_i(sigma_i, s_i),
///
/// where m_i = 1 on the identity support (sigma_i = s_i) and m_i = v_i(sigma_i, s_i)
/// off it. With v = 0 and a constant network this is the identity state. The
/// two off-support amplitudes per site are appended after the network
/// parameters as [v_i(up, down), v_i(down, up)] for i = 0..N-1.
template <WaveFunction Net>
class MeanFieldWrapped {
 public:
  static constexpr bool holomorphic = Net::holomorphic;

  explicit MeanFieldWrapped(Net net) : net_(std::move(net)) {
    NTFS_CHECK(net_.basis() == AuxBasis::Z, BasisMismatch,
               "mean-field wrapping requires an AuxZ network");
    v_ = VectorXc::Zero(2 * net_.n_sites());
    refresh();
  }

  [[nodiscard]] int n_sites() const { return net_.n_sites(); }
  [[nodiscard]] Eigen::Index n_parameters() const { return net_.n_parameters() + v_.size(); }
  [[nodiscard]] AuxBasis basis() const { return AuxBasis::Z; }
  [[nodiscard]] const VectorXc& parameters() const { return theta_; }
  [[nodiscard]] const Net& network() const { return net_; }
  [[nodiscard]] Eigen::Index offset_mean_field() const { return net_.n_parameters(); }

  void set_parameters(const VectorXc& theta) {
    NTFS_CHECK(theta.size() == n_parameters(), ContractViolation,
               "mean-field parameter vector has wrong length");
    require_finite(theta);
    net_.set_parameters(theta.head(net_.n_parameters()));
    v_ = theta.tail(v_.size());
    if constexpr (!holomorphic) v_ = v_.real().template cast<cplx>();
    refresh();
  }

  [[nodiscard]] cplx log_amplitude(const DoubledConfiguration& c) const {
    cplx out = net_.log_amplitude(c);
    if (is_zero_log(out)) return out;
    for (int i = 0; i < n_sites(); ++i) {
      const int slot = off_support_slot(c, i);
      if (slot < 0) continue;
      if (v_[slot] == cplx{0.0, 0.0}) return {kNegInf, 0.0};
      out += std::log(v_[slot]);
    }
    return out;
  }

  [[nodiscard]] VectorXc log_derivatives(const DoubledConfiguration& c) const {
    VectorXc o = VectorXc::Zero(n_parameters());
    o.head(net_.n_parameters()) = net_.log_derivatives(c);
    for (int i = 0; i < n_sites(); ++i) {
      const int slot = off_support_slot(c, i);
      if (slot < 0) continue;
      NTFS_CHECK(v_[slot] != cplx(0.0, 0.0), DomainError,
                 "log-derivative requested at an exact zero of the mean-field factor");
      o[offset_mean_field() + slot] = 1.0 / v_[slot];
    }
    return o;
  }

  [[nodiscard]] AmplitudeGradient amplitude_gradient(const DoubledConfiguration& c) const {
    AmplitudeGradient g{{0.0, 0.0}, VectorXc::Zero(n_parameters())};
    const AmplitudeGradient inner = net_.amplitude_gradient(c);
    cplx factor{1.0, 0.0};
    int zero_slot = -1;
    int n_zero = 0;
    for (int i = 0; i < n_sites(); ++i) {
      const int slot = off_support_slot(c, i);
      if (slot < 0) continue;
      if (v_[slot] == cplx{0.0, 0.0}) {
        ++n_zero;
        zero_slot = slot;
      } else {
        factor *= v_[slot];
      }
    }
    if (n_zero == 0) {
      g.value = inner.value * factor;
      g.gradient.head(net_.n_parameters()) = factor * inner.gradient;
      for (int i = 0; i < n_sites(); ++i) {
        const int slot = off_support_slot(c, i);
        if (slot >= 0) g.gradient[offset_mean_field() + slot] = g.value / v_[slot];
      }
    } else if (n_zero == 1) {
      g.gradient[offset_mean_field() + zero_slot] = inner.value * factor;
    }
    return g;
  }

 private:
  /// Index into v of the off-support factor at site i, or -1 on the support.
  static int off_support_slot(const DoubledConfiguration& c, int i) {
    const int k = c.local_index(i);
    if (k == 1) return 2 * i;
    if (k == 2) return 2 * i + 1;
    return -1;
  }

  void refresh() {
    theta_.resize(n_parameters());
    theta_ << net_.parameters(), v_;
  }

  Net net_;
  VectorXc v_;
  VectorXc theta_;
};

}  // namespace ntfs
