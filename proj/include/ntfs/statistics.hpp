// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/core.hpp"
#include "ntfs/sampling.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace ntfs {

/// Monte Carlo estimate of a complex mean. `error` is the standard error of
/// the real part and `imag_error` that of the imaginary part; `tau` is the
/// integrated autocorrelation time (0.5 for independent samples).
struct EstimatorResult {
  cplx mean{0.0, 0.0};
  double error = 0.0;
  double imag_error = 0.0;
  long n = 0;
  double tau = 0.5;

  /// Hermitian observables should have a real mean within 3 sigma.
  [[nodiscard]] bool imaginary_part_suspicious() const {
    return std::abs(mean.imag()) > 3.0 * imag_error + 1e-12;
  }
};

namespace detail {

struct BinningResult {
  double error = 0.0;
  double tau = 0.5;
};

/// Standard error by binning within chains. Bin sizes double until the error
/// changes by less than 5% or fewer than 16 bins remain.
inline BinningResult binning_error(std::span<const double> x, int chain_length) {
  const std::size_t n = x.size();
  if (n < 2) return {};
  // chain_length <= 0: independent samples, no binning.
  const std::size_t L = chain_length > 0 ? static_cast<std::size_t>(chain_length) : n;
  const std::size_t chains = n / L;
  auto error_at = [&](std::size_t k) {
    const std::size_t per_chain = L / k;
    const std::size_t bins = per_chain * chains;
    std::vector<double> means;
    means.reserve(bins);
    for (std::size_t c = 0; c < chains; ++c)
      for (std::size_t b = 0; b < per_chain; ++b) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += x[c * L + b * k + j];
        means.push_back(s / static_cast<double>(k));
      }
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(means.size());
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= static_cast<double>(std::max<std::size_t>(means.size() - 1, 1));
    return std::pair{std::sqrt(var / static_cast<double>(means.size())), means.size()};
  };

  const double naive = error_at(1).first;
  double err = naive;
  for (std::size_t k = 2; chain_length > 0 && k <= L; k *= 2) {
    const auto [next, bins] = error_at(k);
    if (bins < 16) break;
    const double change = err > 0.0 ? std::abs(next - err) / err : 0.0;
    err = std::max(err, next);
    if (change < 0.05) break;
  }
  const double tau = naive > 0.0 ? 0.5 * (err * err) / (naive * naive) : 0.5;
  return {err, tau};
}

}  // namespace detail

/// Mean and error of per-sample values drawn according to `batch`. Weighted
/// (enumeration) batches are exact and report zero error. Samples flagged
/// invalid are skipped.
inline EstimatorResult summarize(std::span<const cplx> values, const SampleBatch& batch,
                                 std::span<const char> valid = {}) {
  EstimatorResult r;
  const std::size_t n = values.size();
  auto ok = [&](std::size_t i) { return valid.empty() || valid[i]; };
  if (batch.source == SampleSource::Enumeration) {
    const auto& w = *batch.weights;
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (ok(i) && w[i] > 0.0) {
        r.mean += w[i] * values[i];
        norm += w[i];
        ++r.n;
      }
    if (norm > 0.0) r.mean /= norm;
    r.tau = 0.0;
    return r;
  }
  NTFS_CHECK(batch.source != SampleSource::PriorQ, ContractViolation,
             "prior batches need an importance-weighted estimator");
  std::vector<double> re, im;
  re.reserve(n);
  im.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (ok(i)) {
      re.push_back(values[i].real());
      im.push_back(values[i].imag());
    }
  r.n = static_cast<long>(re.size());
  if (r.n == 0) return r;
  for (std::size_t i = 0; i < re.size(); ++i) r.mean += cplx{re[i], im[i]};
  r.mean /= static_cast<double>(r.n);
  // Skipped samples break the chain layout; fall back to one long chain.
  const int chain = batch.source == SampleSource::BornMetropolis && re.size() == n
                        ? batch.chain_length
                        : static_cast<int>(re.size());
  if (batch.source == SampleSource::BornMetropolis) {
    const auto br = detail::binning_error(re, chain);
    r.error = br.error;
    r.tau = br.tau;
    r.imag_error = detail::binning_error(im, chain).error;
  } else {
    const auto br = detail::binning_error(re, 0);
    r.error = br.error;
    r.imag_error = detail::binning_error(im, 0).error;
    r.tau = 0.5;
  }
  return r;
}

}  // namespace ntfs
