// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/ansatz/model.hpp"
#include "ntfs/parallel.hpp"
#include "ntfs/thermofield.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ntfs {

enum class SampleSource { BornMetropolis, BornDirect, PriorQ, Enumeration };

/// A set of doubled configurations. Markov batches are stored chain by chain,
/// `chain_length` samples each, so that binning can respect chain boundaries.
///
/// Weights are present for PriorQ (1/q(S), the estimator multiplies by
/// |chi(S)|^2) and Enumeration (|psi|^2 / sum |psi|^2) batches only.
struct SampleBatch {
  SampleSource source = SampleSource::BornMetropolis;
  std::vector<DoubledConfiguration> configs;
  std::vector<cplx> log_amplitudes;  // empty for PriorQ
  std::optional<std::vector<double>> weights;
  int chain_length = 1;
  double acceptance_rate = 1.0;
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t size() const { return configs.size(); }
};

struct MetropolisConfig {
  int n_chains = 32;
  int n_samples = 1024;  // total; rounded up to a multiple of n_chains
  int sweep_factor = 10;
  int burn_in_sweeps = 100;
};

namespace detail {

inline DoubledConfiguration random_seed(int n, AuxBasis basis, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> bits(0, low_mask(n));
  const std::uint64_t phys = bits(rng);
  // AuxZ chains start on the identity support; AuxX has full support there.
  const std::uint64_t aux = basis == AuxBasis::Z ? phys : bits(rng);
  return {n, phys, aux, basis};
}

}  // namespace detail

/// Metropolis-Hastings on |psi|^2. Each proposal picks a site uniformly and,
/// with equal probability, flips its physical spin, its auxiliary spin, or
/// both; the joint flip keeps chains connected on the identity support. One
/// sweep is N proposals; `sweep_factor` sweeps separate stored samples.
template <WaveFunction M>
SampleBatch metropolis_sample(const M& model, const MetropolisConfig& cfg,
                              std::mt19937_64& rng) {
  NTFS_CHECK(cfg.n_chains >= 1 && cfg.n_samples >= 1 && cfg.sweep_factor >= 1 &&
                 cfg.burn_in_sweeps >= 0,
             ContractViolation, "invalid Metropolis configuration");
  const int n = model.n_sites();
  const AuxBasis basis = model.basis();
  const int per_chain = (cfg.n_samples + cfg.n_chains - 1) / cfg.n_chains;

  std::vector<std::uint64_t> chain_seeds(static_cast<std::size_t>(cfg.n_chains));
  for (auto& s : chain_seeds) s = rng();

  SampleBatch batch;
  batch.source = SampleSource::BornMetropolis;
  batch.chain_length = per_chain;
  const std::size_t total = static_cast<std::size_t>(per_chain) * cfg.n_chains;
  batch.configs.resize(total);
  batch.log_amplitudes.resize(total);
  std::vector<long> accepted(static_cast<std::size_t>(cfg.n_chains), 0);
  std::vector<int> seed_failed(static_cast<std::size_t>(cfg.n_chains), 0);

  const long proposals_per_sample = static_cast<long>(n) * cfg.sweep_factor;
  parallel_for(cfg.n_chains, [&](int chain) {
    std::mt19937_64 local(chain_seeds[static_cast<std::size_t>(chain)]);
    std::uniform_int_distribution<int> site(0, n - 1);
    std::uniform_int_distribution<int> move(0, 2);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    DoubledConfiguration x;
    cplx lx{kNegInf, 0.0};
    for (int attempt = 0; attempt < 64 && is_zero_log(lx); ++attempt) {
      x = detail::random_seed(n, basis, local);
      lx = model.log_amplitude(x);
    }
    if (is_zero_log(lx)) {
      seed_failed[static_cast<std::size_t>(chain)] = 1;
      return;
    }

    long acc = 0;
    auto step = [&] {
      const int i = site(local);
      const int kind = move(local);
      const std::uint64_t bit = std::uint64_t{1} << i;
      std::uint64_t phys = x.physical(), aux = x.auxiliary();
      if (kind != 1) phys ^= bit;
      if (kind != 0) aux ^= bit;
      const DoubledConfiguration y(n, phys, aux, basis);
      const cplx ly = model.log_amplitude(y);
      if (is_zero_log(ly)) return;
      const double log_ratio = 2.0 * (ly.real() - lx.real());
      if (log_ratio >= 0.0 || uni(local) < std::exp(log_ratio)) {
        x = y;
        lx = ly;
        ++acc;
      }
    };
    for (long k = 0; k < static_cast<long>(cfg.burn_in_sweeps) * n; ++k) step();
    for (int s = 0; s < per_chain; ++s) {
      for (long k = 0; k < proposals_per_sample; ++k) step();
      const std::size_t slot = static_cast<std::size_t>(chain) * per_chain + s;
      batch.configs[slot] = x;
      batch.log_amplitudes[slot] = lx;
    }
    accepted[static_cast<std::size_t>(chain)] = acc;
  });

  for (int f : seed_failed)
    NTFS_CHECK(!f, SeedingError, "no chain seed with nonzero amplitude found");
  const double proposals = static_cast<double>(cfg.burn_in_sweeps * n) +
                           static_cast<double>(per_chain) * proposals_per_sample;
  long total_acc = 0;
  for (int c = 0; c < cfg.n_chains; ++c) {
    const long a = accepted[static_cast<std::size_t>(c)];
    total_acc += a;
    if (a == 0)
      batch.warnings.push_back("chain " + std::to_string(c) + " rejected every proposal");
  }
  batch.acceptance_rate = static_cast<double>(total_acc) / (proposals * cfg.n_chains);
  return batch;
}

/// Independent ancestral samples from an autoregressive model.
template <Autoregressive M>
SampleBatch direct_sample(const M& model, int n_samples, std::mt19937_64& rng) {
  NTFS_CHECK(n_samples >= 1, ContractViolation, "need at least one sample");
  SampleBatch batch;
  batch.source = SampleSource::BornDirect;
  batch.configs.reserve(static_cast<std::size_t>(n_samples));
  batch.log_amplitudes.reserve(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    auto [c, lp] = model.sample_direct(rng);
    batch.configs.push_back(c);
    batch.log_amplitudes.push_back(lp);
  }
  return batch;
}

inline constexpr int kMaxEnumerationSites = 12;  // 4^N <= 2^24

/// Every doubled configuration with weight |psi|^2 / sum |psi|^2. Exact zeros
/// are kept with weight 0.
template <WaveFunction M>
SampleBatch enumerate_all(const M& model) {
  const int n = model.n_sites();
  NTFS_CHECK(n <= kMaxEnumerationSites, CapacityError,
             "enumeration limited to 4^N <= 2^24 configurations");
  const std::uint64_t count = std::uint64_t{1} << (2 * n);
  SampleBatch batch;
  batch.source = SampleSource::Enumeration;
  batch.configs.resize(count);
  batch.log_amplitudes.resize(count);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    batch.configs[idx] = DoubledConfiguration::from_index(n, idx, model.basis());
    batch.log_amplitudes[idx] = model.log_amplitude(batch.configs[idx]);
  }
  double top = kNegInf;
  for (const cplx& l : batch.log_amplitudes) top = std::max(top, l.real());
  NTFS_CHECK(top != kNegInf, DomainError, "wave function vanishes identically");
  std::vector<double> w(count);
  double sum = 0.0;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    const double r = batch.log_amplitudes[idx].real();
    w[idx] = r == kNegInf ? 0.0 : std::exp(2.0 * (r - top));
    sum += w[idx];
  }
  for (double& x : w) x /= sum;
  batch.weights = std::move(w);
  return batch;
}

/// Hamming-kernel prior q(S) = prod_i q(S_i), with kernel f(D) = b^{-D}
/// convolved with the identity support. Per site the on-support outcomes
/// carry weight 1 + 1/b and the off-support ones 2/b, out of 2 + 6/b.
struct PriorConfig {
  double kernel_base = 3.0;
};

inline std::array<double, 4> prior_local(const PriorConfig& prior) {
  const double b = prior.kernel_base;
  NTFS_CHECK(b > 1.0, ContractViolation, "kernel base must exceed 1");
  const double norm = 2.0 + 6.0 / b;
  const double on = (1.0 + 1.0 / b) / norm;
  const double off = (2.0 / b) / norm;
  return {on, off, off, on};
}

inline double prior_density(const DoubledConfiguration& c, const PriorConfig& prior) {
  NTFS_CHECK(c.basis() == AuxBasis::Z, BasisMismatch, "prior is defined in the AuxZ basis");
  const auto local = prior_local(prior);
  double q = 1.0;
  for (int i = 0; i < c.n_sites(); ++i) q *= local[static_cast<std::size_t>(c.local_index(i))];
  return q;
}

/// Per-site independent draws from the prior. Weights hold 1/q(S).
inline SampleBatch sample_prior(const PriorConfig& prior, int n_sites, int n_samples,
                                std::mt19937_64& rng) {
  NTFS_CHECK(n_sites >= 1 && n_sites <= kMaxSites, ContractViolation, "site count out of range");
  NTFS_CHECK(n_samples >= 1, ContractViolation, "need at least one sample");
  const auto local = prior_local(prior);
  std::discrete_distribution<int> pick(local.begin(), local.end());
  SampleBatch batch;
  batch.source = SampleSource::PriorQ;
  batch.configs.reserve(static_cast<std::size_t>(n_samples));
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    std::uint64_t phys = 0, aux = 0;
    double q = 1.0;
    for (int i = 0; i < n_sites; ++i) {
      const int outcome = pick(rng);
      q *= local[static_cast<std::size_t>(outcome)];
      if (outcome & 2) phys |= std::uint64_t{1} << i;
      if (outcome & 1) aux |= std::uint64_t{1} << i;
    }
    batch.configs.emplace_back(n_sites, phys, aux, AuxBasis::Z);
    w.push_back(1.0 / q);
  }
  batch.weights = std::move(w);
  return batch;
}

}  // namespace ntfs

namespace ntfs {

enum class SamplerBackend { enumeration, metropolis, direct };

inline std::string to_string(SamplerBackend b) {
  switch (b) {
    case SamplerBackend::enumeration: return "enumeration";
    case SamplerBackend::metropolis: return "metropolis";
    case SamplerBackend::direct: return "direct";
  }
  return "?";
}

inline SamplerBackend sampler_backend_from_string(const std::string& s) {
  if (s == "enumeration") return SamplerBackend::enumeration;
  if (s == "metropolis") return SamplerBackend::metropolis;
  if (s == "direct") return SamplerBackend::direct;
  throw SchemaError("unknown sampler backend '" + s + "'");
}

struct SamplerSettings {
  SamplerBackend backend = SamplerBackend::metropolis;
  int n_samples = 1024;
  MetropolisConfig metropolis;
};

/// Born-distribution batch from the configured backend.
template <WaveFunction M>
SampleBatch draw_samples(const M& model, const SamplerSettings& s, std::mt19937_64& rng) {
  switch (s.backend) {
    case SamplerBackend::enumeration:
      return enumerate_all(model);
    case SamplerBackend::metropolis: {
      MetropolisConfig cfg = s.metropolis;
      cfg.n_samples = s.n_samples;
      return metropolis_sample(model, cfg, rng);
    }
    case SamplerBackend::direct:
      if constexpr (Autoregressive<M>) {
        return direct_sample(model, s.n_samples, rng);
      } else {
        throw ContractViolation("direct sampling requires an autoregressive ansatz");
      }
  }
  throw ContractViolation("unhandled sampler backend");
}

}  // namespace ntfs
