// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/io/checkpoint.hpp"
#include "ntfs/io/config.hpp"
#include "ntfs/io/series.hpp"
#include "ntfs/oracles/ed.hpp"
#include "ntfs/oracles/metts.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

namespace ntfs {

/// File names inside a run's output directory.
struct RunPaths {
  std::filesystem::path dir;
  [[nodiscard]] std::string prepare_series() const { return (dir / "prepare.jsonl").string(); }
  [[nodiscard]] std::string evolve_series() const { return (dir / "evolve.jsonl").string(); }
  [[nodiscard]] std::string ed_series() const { return (dir / "ed.jsonl").string(); }
  [[nodiscard]] std::string metts_series() const { return (dir / "metts.jsonl").string(); }
  [[nodiscard]] std::string prepare_checkpoint() const { return (dir / "prepare.ckpt").string(); }
  [[nodiscard]] std::string evolve_checkpoint() const { return (dir / "evolve.ckpt").string(); }
  [[nodiscard]] std::string beta_checkpoint(double beta) const {
    std::ostringstream os;
    os << "beta_" << std::fixed << std::setprecision(4) << beta << ".ckpt";
    return (dir / os.str()).string();
  }
};

inline RunPaths make_paths(const RunConfig& c) {
  RunPaths p{c.output};
  std::filesystem::create_directories(p.dir);
  return p;
}

/// Progress callback: receives every record written.
using RecordHook = std::function<void(const TimeSeriesRecord&)>;

/// Observable estimates of the current state on a fresh batch.
inline TimeSeriesRecord measure(const EvolutionState& es, const std::vector<ObservableSpec>& specs,
                                SamplerSettings sampler, int n_samples, std::mt19937_64& rng) {
  if (n_samples > 0) sampler.n_samples = n_samples;
  TimeSeriesRecord r;
  r.segment = to_string(es.segment);
  r.step = es.step;
  r.beta = es.beta;
  r.t = es.t;
  es.state.visit([&](const auto& m) {
    const SampleBatch batch = draw_samples(m, sampler, rng);
    r.diagnostics["acceptance_rate"] = batch.acceptance_rate;
    for (const auto& s : specs) {
      const EstimatorResult e = estimate(m, s, batch);
      r.observables[s.name] = {e.mean.real(), e.error, e.mean.imag()};
      if (e.imaginary_part_suspicious()) r.diagnostics["imag_warning_" + s.name] = e.mean.imag();
    }
  });
  const auto& e = r.observables.at("energy_per_site");
  const double n = es.state.n_sites();
  r.energy = {n * e.mean, n * e.error, n * e.imag};
  return r;
}

namespace detail {

inline bool record_after(const TimeSeriesRecord& r, const EvolutionState& es) {
  const Segment s = segment_from_string(r.segment);
  if (s != es.segment) return static_cast<int>(s) > static_cast<int>(es.segment);
  return r.step > es.step;
}

/// Keeps only records at or before the checkpointed position.
inline void truncate_series(const std::string& path, const EvolutionState& es) {
  if (!std::filesystem::exists(path)) return;
  std::vector<TimeSeriesRecord> rows = read_series(path);
  std::erase_if(rows, [&](const auto& r) { return record_after(r, es); });
  write_series(path, rows);
}

}  // namespace detail

/// Thermal preparation along C1 (p-ITE, skipped for ARNNO_X) and C2 (SR) up
/// to beta_target. With `resume`, continues from a prepare checkpoint.
/// On failure the last good state is written to the prepare checkpoint and
/// the error is rethrown.
inline EvolutionState run_prepare(const RunConfig& cfg, const std::optional<std::string>& resume = {},
                                  const RecordHook& hook = {}) {
  const RunPaths paths = make_paths(cfg);
  const Lattice lat = cfg.lattice();
  const PauliOperator H0 = cfg.H0();
  const auto specs = standard_observable_suite(lat, H0, cfg.correlator_mode);
  const std::string series = paths.prepare_series();
  constexpr double eps = 1e-9;

  std::mt19937_64 rng(cfg.seed);
  std::optional<EvolutionState> maybe;
  if (resume) {
    Checkpoint ck = read_checkpoint(*resume);
    NTFS_CHECK(ck.state.state.spec() == cfg.ansatz, SchemaError,
               "checkpoint architecture does not match the configuration");
    NTFS_CHECK(ck.state.segment != Segment::C3_tvmc, SchemaError,
               "cannot resume preparation from a real-time checkpoint");
    rng = rng_from_string(ck.rng_state);
    maybe.emplace(std::move(ck.state));
    detail::truncate_series(series, *maybe);
  } else {
    maybe.emplace(EvolutionState{VariationalState::identity(cfg.ansatz, rng)});
    maybe->segment = cfg.ansatz.kind == Architecture::ARNNO_X ? Segment::C2_sr : Segment::C1_pite;
    std::filesystem::remove(series);
  }
  EvolutionState& es = *maybe;
  auto emit = [&](TimeSeriesRecord r) {
    append_record(series, r);
    if (hook) hook(r);
  };
  if (!resume) emit(measure(es, specs, cfg.sr.sampler, cfg.observe_samples, rng));

  std::vector<double> marks = cfg.checkpoint_betas;
  marks.push_back(cfg.beta_target);
  std::sort(marks.begin(), marks.end());

  const bool use_pite = cfg.ansatz.kind != Architecture::ARNNO_X;
  try {
    while (es.beta < cfg.beta_target - eps) {
      if (es.segment == Segment::C1_pite &&
          (!use_pite || es.beta >= std::min(cfg.beta_switch, cfg.beta_target) - eps)) {
        es.segment = Segment::C2_sr;
        es.guard_reference = -1.0;
      }
      double next_mark = cfg.beta_target;
      for (double m : marks)
        if (m > es.beta + eps) {
          next_mark = m;
          break;
        }
      TimeSeriesRecord rec;
      std::map<std::string, double> diag;
      if (es.segment == Segment::C1_pite) {
        PiteConfig pc = cfg.pite;
        pc.step = std::min({pc.step, cfg.beta_switch - es.beta, next_mark - es.beta});
        const PiteDiagnostics d = pite_step(es, H0, pc, rng);
        diag = {{"infidelity", d.infidelity},
                {"iterations", d.iterations},
                {"gradient_norm", d.gradient_norm}};
      } else {
        TdvpConfig tc = cfg.sr;
        tc.step = std::min(tc.step, next_mark - es.beta);
        const StepDiagnostics d = sr_step(es, H0, tc, rng);
        diag = {{"force_snr", d.force_snr},
                {"min_kept_eigenvalue", d.min_kept_eigenvalue},
                {"acceptance_rate", d.acceptance_rate},
                {"rejections", d.rejections}};
      }
      const bool at_mark = std::abs(es.beta - next_mark) <= eps;
      if (at_mark || es.step % cfg.observe_every == 0) {
        rec = measure(es, specs, cfg.sr.sampler, cfg.observe_samples, rng);
        for (const auto& [k, v] : diag) rec.diagnostics[k] = v;
        emit(rec);
      }
      if (at_mark && next_mark < cfg.beta_target - eps)
        write_checkpoint(paths.beta_checkpoint(next_mark), es, rng);
      if (cfg.checkpoint_every > 0 && es.step % cfg.checkpoint_every == 0)
        write_checkpoint(paths.prepare_checkpoint(), es, rng);
    }
  } catch (const EvolutionFailure&) {
    write_checkpoint(paths.prepare_checkpoint(), es, rng);
    throw;
  }
  write_checkpoint(paths.prepare_checkpoint(), es, rng);
  write_checkpoint(paths.beta_checkpoint(es.beta), es, rng);
  return es;
}

/// Real-time evolution along C3 under H_t from a prepared checkpoint, or
/// continuation of an interrupted C3 run.
inline EvolutionState run_evolve(const RunConfig& cfg, const std::string& checkpoint,
                                 const RecordHook& hook = {}) {
  const RunPaths paths = make_paths(cfg);
  const PauliOperator Ht = cfg.Ht();
  const auto specs = standard_observable_suite(cfg.lattice(), Ht, cfg.correlator_mode);
  const std::string series = paths.evolve_series();
  constexpr double eps = 1e-9;

  Checkpoint ck = read_checkpoint(checkpoint);
  NTFS_CHECK(ck.state.state.spec() == cfg.ansatz, SchemaError,
             "checkpoint architecture does not match the configuration");
  std::mt19937_64 rng = rng_from_string(ck.rng_state);
  EvolutionState es = std::move(ck.state);
  auto emit = [&](const TimeSeriesRecord& r) {
    append_record(series, r);
    if (hook) hook(r);
  };
  if (es.segment != Segment::C3_tvmc) {
    es.segment = Segment::C3_tvmc;
    es.t = 0.0;
    es.step = 0;
    es.guard_reference = -1.0;
    std::filesystem::remove(series);
    emit(measure(es, specs, cfg.tvmc.sampler, cfg.observe_samples, rng));
  } else {
    detail::truncate_series(series, es);
  }
  try {
    while (es.t < cfg.t_target - eps) {
      TdvpConfig tc = cfg.tvmc;
      tc.step = std::min(tc.step, cfg.t_target - es.t);
      const StepDiagnostics d = tvmc_step(es, Ht, tc, rng);
      const bool last = es.t >= cfg.t_target - eps;
      if (last || es.step % cfg.observe_every == 0) {
        TimeSeriesRecord rec = measure(es, specs, cfg.tvmc.sampler, cfg.observe_samples, rng);
        rec.diagnostics["force_snr"] = d.force_snr;
        rec.diagnostics["min_kept_eigenvalue"] = d.min_kept_eigenvalue;
        rec.diagnostics["rejections"] = d.rejections;
        emit(rec);
      }
      if (cfg.checkpoint_every > 0 && es.step % cfg.checkpoint_every == 0)
        write_checkpoint(paths.evolve_checkpoint(), es, rng);
    }
  } catch (const EvolutionFailure&) {
    write_checkpoint(paths.evolve_checkpoint(), es, rng);
    throw;
  }
  write_checkpoint(paths.evolve_checkpoint(), es, rng);
  return es;
}

inline std::vector<double> default_beta_grid(double beta_target) {
  std::vector<double> g;
  const int n = std::max(1, static_cast<int>(std::ceil(beta_target / 0.05 - 1e-9)));
  for (int k = 0; k <= n; ++k) g.push_back(beta_target * k / n);
  return g;
}

inline TimeSeriesRecord dense_record(const std::string& segment, double beta, double t,
                                     const std::vector<ObservableSpec>& specs,
                                     const std::vector<double>& values, int n_sites) {
  TimeSeriesRecord r;
  r.segment = segment;
  r.beta = beta;
  r.t = t;
  for (std::size_t k = 0; k < specs.size(); ++k) r.observables[specs[k].name] = {values[k], 0.0, 0.0};
  r.energy = {n_sites * r.observables.at("energy_per_site").mean, 0.0, 0.0};
  return r;
}

/// Exact thermal observables on a beta grid and, with a quench model and
/// t_target > 0, the exact quench from beta_target.
inline std::vector<TimeSeriesRecord> run_ed(const RunConfig& cfg) {
  const RunPaths paths = make_paths(cfg);
  const Lattice lat = cfg.lattice();
  const int n = lat.n_sites();
  const PauliOperator H0 = cfg.H0();
  const auto specs = standard_observable_suite(lat, H0, cfg.correlator_mode);
  std::vector<TimeSeriesRecord> rows;
  const auto betas = cfg.ed_betas.empty() ? default_beta_grid(cfg.beta_target) : cfg.ed_betas;
  long step = 0;
  for (double b : betas) {
    const DenseState rho = ed_thermal(H0, b);
    std::vector<double> v;
    for (const auto& s : specs) v.push_back(expectation(rho.rho, s.op).real());
    rows.push_back(dense_record("ED_thermal", b, 0.0, specs, v, n));
    rows.back().step = step++;
  }
  if (cfg.quench_model && cfg.t_target > 0.0) {
    const PauliOperator Ht = cfg.Ht();
    const auto tspecs = standard_observable_suite(lat, Ht, cfg.correlator_mode);
    std::vector<double> grid;
    const int nt = std::max(1, static_cast<int>(std::ceil(cfg.t_target / cfg.ed_dt - 1e-9)));
    for (int k = 0; k <= nt; ++k) grid.push_back(cfg.t_target * k / nt);
    const auto series = ed_evolve(ed_thermal(H0, cfg.beta_target), Ht, grid, tspecs);
    step = 0;
    for (const auto& row : series) {
      rows.push_back(dense_record("ED_evolve", cfg.beta_target, row.t, tspecs, row.values, n));
      rows.back().step = step++;
    }
  }
  write_series(paths.ed_series(), rows);
  return rows;
}

/// METTS estimates (mean and binned standard error) at each beta of the ED
/// grid, or at beta_target when no grid is given.
inline std::vector<TimeSeriesRecord> run_metts(const RunConfig& cfg) {
  const RunPaths paths = make_paths(cfg);
  const Lattice lat = cfg.lattice();
  const PauliOperator H0 = cfg.H0();
  const auto specs = standard_observable_suite(lat, H0, cfg.correlator_mode);
  std::mt19937_64 rng(cfg.seed);
  std::vector<TimeSeriesRecord> rows;
  const auto betas = cfg.ed_betas.empty() ? std::vector<double>{cfg.beta_target} : cfg.ed_betas;
  long step = 0;
  for (double b : betas) {
    const MettsResult res = metts_run(H0, b, specs, cfg.metts, rng);
    TimeSeriesRecord r;
    r.segment = "METTS";
    r.beta = b;
    r.step = step++;
    for (std::size_t k = 0; k < specs.size(); ++k) {
      std::vector<double> col;
      for (const auto& row : res.samples) col.push_back(row[k]);
      double mean = 0.0;
      for (double x : col) mean += x;
      mean /= static_cast<double>(col.size());
      const auto br = detail::binning_error(col, static_cast<int>(col.size()));
      r.observables[specs[k].name] = {mean, br.error, 0.0};
    }
    const auto& e = r.observables.at("energy_per_site");
    r.energy = {lat.n_sites() * e.mean, lat.n_sites() * e.error, 0.0};
    r.diagnostics["max_norm_drift"] = res.max_norm_drift;
    rows.push_back(r);
  }
  write_series(paths.metts_series(), rows);
  return rows;
}

}  // namespace ntfs
