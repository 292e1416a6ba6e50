// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/ansatz/model.hpp"

#include <array>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace ntfs {

/// Autoregressive recurrent network operator (ARNNO).
///
/// Sites are scanned in order; an LSTM cell of width P reads the one-hot local
/// index of the previous site and emits h_i, from which
///   ln p~_i = W_amp h_i + b_amp,      phi_i = pi (W_ph h_i + b_ph)
/// over the four local states |sigma, s> with index 2*[sigma down] + [s down].
/// The conditional is psi_i = sqrt(softmax(ln p~_i)) e^{i phi_i}.
///
/// In the AuxZ basis a mean-field factor m(sigma, s) = alpha^2 on the diagonal
/// and 1 - alpha^2 off it multiplies each local amplitude before
/// normalisation; alpha = 1 gives the identity support exactly. The AuxX
/// variant has no such factor.
///
/// Parameters are real. Layout: [W_x (4P x 4), W_h (4P x P), b (4P),
/// W_amp (4 x P), b_amp (4), W_ph (4 x P), b_ph (4), alpha (AuxZ only)],
/// matrices row-major, gates ordered (input, forget, cell, output).
class Arnno {
 public:
  static constexpr bool holomorphic = false;
  static constexpr int kLocal = 4;

  struct Conditional {
    std::array<double, 4> probabilities{};
    std::array<double, 4> phases{};
  };

  Arnno(int n_sites, int hidden, AuxBasis basis)
      : n_(n_sites), p_(hidden), basis_(basis) {
    NTFS_CHECK(n_sites >= 1 && n_sites <= kMaxSites, ContractViolation,
               "ARNNO site count out of range");
    NTFS_CHECK(hidden >= 1, ContractViolation, "ARNNO hidden width must be >= 1");
    theta_ = VectorXc::Zero(count_parameters());
    if (basis_ == AuxBasis::Z) theta_[offset_alpha()] = 1.0;
    unpack();
  }

  [[nodiscard]] int n_sites() const { return n_; }
  [[nodiscard]] int hidden() const { return p_; }
  [[nodiscard]] AuxBasis basis() const { return basis_; }
  [[nodiscard]] Eigen::Index n_parameters() const { return theta_.size(); }
  [[nodiscard]] const VectorXc& parameters() const { return theta_; }

  void set_parameters(const VectorXc& theta) {
    NTFS_CHECK(theta.size() == theta_.size(), ContractViolation,
               "ARNNO parameter vector has wrong length");
    require_finite(theta);
    theta_ = theta.real().cast<cplx>();
    unpack();
  }

  [[nodiscard]] Eigen::Index offset_wx() const { return 0; }
  [[nodiscard]] Eigen::Index offset_wh() const { return 4 * p_ * kLocal; }
  [[nodiscard]] Eigen::Index offset_bg() const { return offset_wh() + 4 * p_ * p_; }
  [[nodiscard]] Eigen::Index offset_wamp() const { return offset_bg() + 4 * p_; }
  [[nodiscard]] Eigen::Index offset_bamp() const { return offset_wamp() + kLocal * p_; }
  [[nodiscard]] Eigen::Index offset_wph() const { return offset_bamp() + kLocal; }
  [[nodiscard]] Eigen::Index offset_bph() const { return offset_wph() + kLocal * p_; }
  [[nodiscard]] Eigen::Index offset_alpha() const { return offset_bph() + kLocal; }

  /// Identity (AuxZ) or rotated-identity (AuxX) state for any draw of the
  /// head biases: W_amp = W_ph = 0, b_amp = x 1, b_ph = (y, y, y, y - 1) in
  /// the rotated basis and y 1 otherwise, x, y ~ N(0, sigma). LSTM weights
  /// are drawn uniformly in [-1/sqrt(P), 1/sqrt(P)].
  static Arnno identity(int n_sites, int hidden, AuxBasis basis, double sigma_init,
                        std::mt19937_64& rng) {
    Arnno net(n_sites, hidden, basis);
    VectorXc theta = net.theta_;
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    std::uniform_real_distribution<double> uni(-bound, bound);
    for (Eigen::Index k = 0; k < net.offset_wamp(); ++k) theta[k] = uni(rng);
    std::normal_distribution<double> gauss(0.0, sigma_init);
    const double x = gauss(rng);
    const double y = gauss(rng);
    for (int k = 0; k < kLocal; ++k) {
      theta[net.offset_bamp() + k] = x;
      theta[net.offset_bph() + k] = y;
    }
    if (basis == AuxBasis::X) theta[net.offset_bph() + 3] = y - 1.0;
    else theta[net.offset_alpha()] = 1.0;
    net.set_parameters(theta);
    return net;
  }

  [[nodiscard]] cplx log_amplitude(const DoubledConfiguration& c) const {
    require_basis(c, basis_);
    check_size(c);
    Cell cell = initial_cell();
    cplx out{0.0, 0.0};
    for (int i = 0; i < n_; ++i) {
      if (i > 0) advance(cell, c.local_index(i - 1));
      const Head head = evaluate_head(cell.h);
      const int k = c.local_index(i);
      if (head.log_p[k] == kNegInf) return {kNegInf, 0.0};
      out += cplx{0.5 * head.log_p[k], head.phase[k]};
    }
    return out;
  }

  [[nodiscard]] VectorXc log_derivatives(const DoubledConfiguration& c) const {
    require_basis(c, basis_);
    check_size(c);
    const Trace tr = forward(c);
    NTFS_CHECK(!tr.zero, DomainError,
               "log-derivative requested at an exact zero of the ARNNO");
    return backward(c, tr);
  }

  [[nodiscard]] AmplitudeGradient amplitude_gradient(const DoubledConfiguration& c) const {
    require_basis(c, basis_);
    check_size(c);
    const Trace tr = forward(c);
    AmplitudeGradient g{{0.0, 0.0}, VectorXc::Zero(n_parameters())};
    if (!tr.zero) {
      g.value = std::exp(tr.log_psi);
      g.gradient = g.value * backward(c, tr);
      return g;
    }
    // Zeros only arise from the AuxZ mean-field factor. With a single vanishing
    // site j, d psi / d alpha = m'_k e^{l_k/2} / sqrt(Z_j) e^{i phi} prod_{i!=j} psi_i.
    int zero_site = -1;
    int n_zero = 0;
    cplx log_rest{0.0, 0.0};
    for (int i = 0; i < n_; ++i) {
      const int k = c.local_index(i);
      const Head& head = tr.heads[static_cast<std::size_t>(i)];
      if (head.log_p[k] == kNegInf) {
        ++n_zero;
        zero_site = i;
      } else {
        log_rest += cplx{0.5 * head.log_p[k], head.phase[k]};
      }
    }
    if (n_zero == 1 && basis_ == AuxBasis::Z) {
      const Head& head = tr.heads[static_cast<std::size_t>(zero_site)];
      const int k = c.local_index(zero_site);
      const double alpha = theta_[offset_alpha()].real();
      const double dm = on_support(k) ? 2.0 * alpha : -2.0 * alpha;
      const double log_norm = head.log_norm;  // ln sum_k m_k^2 e^{l_k}
      const cplx factor = dm * std::exp(0.5 * (head.raw_logit[k] - log_norm)) *
                          std::exp(cplx{0.0, head.raw_phase[k]});
      g.gradient[offset_alpha()] = factor * std::exp(log_rest);
    }
    return g;
  }

  /// Normalised conditional distribution and phases of the next site given
  /// the local indices of the preceding sites.
  [[nodiscard]] Conditional conditionals(std::span<const int> prefix) const {
    NTFS_CHECK(static_cast<int>(prefix.size()) < n_, ContractViolation,
               "prefix must leave at least one site");
    Cell cell = initial_cell();
    for (int k : prefix) {
      NTFS_CHECK(k >= 0 && k < kLocal, ContractViolation, "local index out of range");
      advance(cell, k);
    }
    const Head head = evaluate_head(cell.h);
    Conditional out;
    for (int k = 0; k < kLocal; ++k) {
      out.probabilities[static_cast<std::size_t>(k)] = std::exp(head.log_p[k]);
      out.phases[static_cast<std::size_t>(k)] = head.phase[k];
    }
    return out;
  }

  /// Ancestral sampling from |psi|^2; returns the configuration and ln psi.
  [[nodiscard]] std::pair<DoubledConfiguration, cplx> sample_direct(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Cell cell = initial_cell();
    std::uint64_t phys = 0, aux = 0;
    cplx log_psi{0.0, 0.0};
    for (int i = 0; i < n_; ++i) {
      const Head head = evaluate_head(cell.h);
      const double u = uni(rng);
      double acc = 0.0;
      int k = kLocal - 1;
      for (int j = 0; j < kLocal; ++j) {
        acc += std::exp(head.log_p[j]);
        if (u < acc && head.log_p[j] != kNegInf) {
          k = j;
          break;
        }
      }
      while (head.log_p[k] == kNegInf) --k;
      if (k & 2) phys |= std::uint64_t{1} << i;
      if (k & 1) aux |= std::uint64_t{1} << i;
      log_psi += cplx{0.5 * head.log_p[k], head.phase[k]};
      if (i + 1 < n_) advance(cell, k);
    }
    return {DoubledConfiguration(n_, phys, aux, basis_), log_psi};
  }

 private:
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  struct Cell {
    VectorXd h, c;
  };
  struct Step {
    int input = -1;
    VectorXd h_prev, c_prev, ig, fg, gg, og, c, tanh_c, h;
  };
  struct Head {
    Eigen::Vector4d raw_logit;  // W_amp h + b_amp
    Eigen::Vector4d raw_phase;  // pi (W_ph h + b_ph)
    Eigen::Vector4d log_p;      // normalised, mean-field included
    Eigen::Vector4d phase;      // includes pi for negative mean-field weights
    double log_norm = 0.0;
  };
  struct Trace {
    std::vector<Step> steps;
    std::vector<Head> heads;
    cplx log_psi{0.0, 0.0};
    bool zero = false;
  };

  [[nodiscard]] Eigen::Index count_parameters() const {
    const Eigen::Index base = 4 * p_ * kLocal + 4 * p_ * p_ + 4 * p_ +
                              2 * (kLocal * p_ + kLocal);
    return basis_ == AuxBasis::Z ? base + 1 : base;
  }

  static bool on_support(int k) { return k == 0 || k == 3; }

  void check_size(const DoubledConfiguration& c) const {
    NTFS_CHECK(c.n_sites() == n_, ContractViolation, "configuration size mismatch");
  }

  void unpack() {
    const VectorXd r = theta_.real();
    auto mat = [&](Eigen::Index off, Eigen::Index rows, Eigen::Index cols) {
      return RowMat(Eigen::Map<const RowMat>(r.data() + off, rows, cols));
    };
    wx_ = mat(offset_wx(), 4 * p_, kLocal);
    wh_ = mat(offset_wh(), 4 * p_, p_);
    bg_ = r.segment(offset_bg(), 4 * p_);
    wamp_ = mat(offset_wamp(), kLocal, p_);
    bamp_ = r.segment(offset_bamp(), kLocal);
    wph_ = mat(offset_wph(), kLocal, p_);
    bph_ = r.segment(offset_bph(), kLocal);
    alpha_ = basis_ == AuxBasis::Z ? r[offset_alpha()] : 1.0;
  }

  [[nodiscard]] Cell initial_cell() const {
    Cell cell{VectorXd::Zero(p_), VectorXd::Zero(p_)};
    step_into(cell, -1, nullptr);
    return cell;
  }

  void advance(Cell& cell, int input) const { step_into(cell, input, nullptr); }

  static double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

  void step_into(Cell& cell, int input, Step* record) const {
    VectorXd z = bg_ + wh_ * cell.h;
    if (input >= 0) z += wx_.col(input);
    VectorXd ig(p_), fg(p_), gg(p_), og(p_);
    for (int j = 0; j < p_; ++j) {
      ig[j] = sigmoid(z[j]);
      fg[j] = sigmoid(z[p_ + j]);
      gg[j] = std::tanh(z[2 * p_ + j]);
      og[j] = sigmoid(z[3 * p_ + j]);
    }
    VectorXd c = fg.cwiseProduct(cell.c) + ig.cwiseProduct(gg);
    VectorXd tc = c.array().tanh().matrix();
    VectorXd h = og.cwiseProduct(tc);
    if (record) {
      record->input = input;
      record->h_prev = cell.h;
      record->c_prev = cell.c;
      record->ig = ig;
      record->fg = fg;
      record->gg = gg;
      record->og = og;
      record->c = c;
      record->tanh_c = tc;
      record->h = h;
    }
    cell.h = std::move(h);
    cell.c = std::move(c);
  }

  [[nodiscard]] Head evaluate_head(const VectorXd& h) const {
    Head head;
    head.raw_logit = wamp_ * h + bamp_;
    head.raw_phase = kPi * (wph_ * h + bph_);
    head.phase = head.raw_phase;
    Eigen::Vector4d logit = head.raw_logit;
    if (basis_ == AuxBasis::Z) {
      for (int k = 0; k < kLocal; ++k) {
        const double m = on_support(k) ? alpha_ * alpha_ : 1.0 - alpha_ * alpha_;
        logit[k] += m == 0.0 ? kNegInf : 2.0 * std::log(std::abs(m));
        if (m < 0.0) head.phase[k] += kPi;
      }
    }
    const double mx = logit.maxCoeff();
    double sum = 0.0;
    for (int k = 0; k < kLocal; ++k)
      if (logit[k] != kNegInf) sum += std::exp(logit[k] - mx);
    head.log_norm = mx + std::log(sum);
    for (int k = 0; k < kLocal; ++k)
      head.log_p[k] = logit[k] == kNegInf ? kNegInf : logit[k] - head.log_norm;
    return head;
  }

  [[nodiscard]] Trace forward(const DoubledConfiguration& c) const {
    Trace tr;
    tr.steps.resize(static_cast<std::size_t>(n_));
    tr.heads.resize(static_cast<std::size_t>(n_));
    Cell cell{VectorXd::Zero(p_), VectorXd::Zero(p_)};
    for (int i = 0; i < n_; ++i) {
      step_into(cell, i == 0 ? -1 : c.local_index(i - 1), &tr.steps[static_cast<std::size_t>(i)]);
      Head& head = tr.heads[static_cast<std::size_t>(i)];
      head = evaluate_head(cell.h);
      const int k = c.local_index(i);
      if (head.log_p[k] == kNegInf) tr.zero = true;
      else tr.log_psi += cplx{0.5 * head.log_p[k], head.phase[k]};
    }
    if (tr.zero) tr.log_psi = {kNegInf, 0.0};
    return tr;
  }

  /// Reverse accumulation of d ln psi / d theta with complex adjoints.
  [[nodiscard]] VectorXc backward(const DoubledConfiguration& c, const Trace& tr) const {
    VectorXc g = VectorXc::Zero(n_parameters());
    using RowMatC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMatC> gwx(g.data() + offset_wx(), 4 * p_, kLocal);
    Eigen::Map<RowMatC> gwh(g.data() + offset_wh(), 4 * p_, p_);
    Eigen::Map<RowMatC> gwamp(g.data() + offset_wamp(), kLocal, p_);
    Eigen::Map<RowMatC> gwph(g.data() + offset_wph(), kLocal, p_);
    const cplx ipi{0.0, kPi};

    VectorXc dh_next = VectorXc::Zero(p_);
    VectorXc dc_next = VectorXc::Zero(p_);
    for (int i = n_ - 1; i >= 0; --i) {
      const Step& st = tr.steps[static_cast<std::size_t>(i)];
      const Head& head = tr.heads[static_cast<std::size_t>(i)];
      const int k = c.local_index(i);

      Eigen::Vector4d dlogit;  // d(0.5 ln p_k) / d logit
      for (int j = 0; j < kLocal; ++j) {
        const double pj = head.log_p[j] == kNegInf ? 0.0 : std::exp(head.log_p[j]);
        dlogit[j] = 0.5 * ((j == k ? 1.0 : 0.0) - pj);
      }
      const VectorXc h = st.h.cast<cplx>();
      gwamp += dlogit.cast<cplx>() * h.transpose();
      g.segment(offset_bamp(), kLocal) += dlogit.cast<cplx>();
      gwph.row(k) += ipi * h.transpose();
      g[offset_bph() + k] += ipi;
      if (basis_ == AuxBasis::Z) {
        const double a = alpha_;
        for (int j = 0; j < kLocal; ++j) {
          if (dlogit[j] == 0.0) continue;
          const double m = on_support(j) ? a * a : 1.0 - a * a;
          if (m == 0.0) continue;
          const double dm = on_support(j) ? 2.0 * a : -2.0 * a;
          g[offset_alpha()] += dlogit[j] * 2.0 * dm / m;
        }
      }

      VectorXc dh = wamp_.transpose().cast<cplx>() * dlogit.cast<cplx>() +
                    ipi * wph_.row(k).transpose().cast<cplx>() + dh_next;
      VectorXc dc = dh.cwiseProduct((st.og.array() * (1.0 - st.tanh_c.array().square()))
                                        .matrix().cast<cplx>()) + dc_next;
      VectorXc dz(4 * p_);
      for (int j = 0; j < p_; ++j) {
        dz[j] = dc[j] * st.gg[j] * st.ig[j] * (1.0 - st.ig[j]);
        dz[p_ + j] = dc[j] * st.c_prev[j] * st.fg[j] * (1.0 - st.fg[j]);
        dz[2 * p_ + j] = dc[j] * st.ig[j] * (1.0 - st.gg[j] * st.gg[j]);
        dz[3 * p_ + j] = dh[j] * st.tanh_c[j] * st.og[j] * (1.0 - st.og[j]);
      }
      if (st.input >= 0) gwx.col(st.input) += dz;
      gwh += dz * st.h_prev.cast<cplx>().transpose();
      g.segment(offset_bg(), 4 * p_) += dz;
      dc_next = dc.cwiseProduct(st.fg.cast<cplx>());
      dh_next = wh_.transpose().cast<cplx>() * dz;
    }
    return g;
  }

  int n_;
  int p_;
  AuxBasis basis_;
  VectorXc theta_;
  RowMat wx_, wh_, wamp_, wph_;
  VectorXd bg_, bamp_, bph_;
  double alpha_ = 1.0;
};

static_assert(WaveFunction<Arnno>);
static_assert(Autoregressive<Arnno>);

}  // namespace ntfs
