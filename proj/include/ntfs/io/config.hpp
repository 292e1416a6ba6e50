// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/ansatz/variational_state.hpp"
#include "ntfs/evolution/pite.hpp"
#include "ntfs/lattice.hpp"
#include "ntfs/observables.hpp"
#include "ntfs/oracles/metts.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ntfs {

using json = nlohmann::json;

enum class Preset { desk, paper };

/// Sample budgets: the paper preset uses 16k (p-ITE), 64k (SR) and 500k
/// (t-VMC) samples; the desk preset divides these by 8.
struct PresetBudgets {
  int pite = 2048;
  int sr = 8192;
  int tvmc = 65536;
};

inline PresetBudgets preset_budgets(Preset p) {
  if (p == Preset::paper) return {16384, 65536, 500000};
  return {};
}

inline Preset preset_from_string(const std::string& s) {
  if (s == "desk") return Preset::desk;
  if (s == "paper") return Preset::paper;
  throw SchemaError("unknown preset '" + s + "' (expected desk or paper)");
}

/// Everything a run needs. Backend "auto" resolves to direct sampling for
/// autoregressive ansaetze and Metropolis otherwise.
struct RunConfig {
  LatticeKind lattice_kind = LatticeKind::chain;
  std::vector<int> extent{4};
  Boundary boundary = Boundary::periodic;
  IsingParameters model;
  std::optional<IsingParameters> quench_model;
  ArchitectureSpec ansatz;

  std::string sampler_backend = "auto";
  MetropolisConfig metropolis;
  int sweep_factor_override = 0;  // 0: 10 for RBMO-like, 1 for ARNNO

  PiteConfig pite;
  double beta_switch = 0.1;
  TdvpConfig sr;
  TdvpConfig tvmc;

  double beta_target = 1.0;
  double t_target = 0.0;

  CorrelatorMode correlator_mode = CorrelatorMode::bond_average;
  int observe_every = 10;
  int observe_samples = 0;  // 0: the segment's own sample count

  int checkpoint_every = 0;
  std::vector<double> checkpoint_betas;

  std::vector<double> ed_betas;
  double ed_dt = 0.01;
  MettsConfig metts;

  std::string output = "run";
  std::uint64_t seed = 1;
  Preset preset = Preset::desk;

  [[nodiscard]] Lattice lattice() const { return build_lattice(lattice_kind, extent, boundary); }
  [[nodiscard]] PauliOperator H0() const { return build_tfim(lattice(), model); }
  [[nodiscard]] PauliOperator Ht() const {
    NTFS_CHECK(quench_model.has_value(), SchemaError, "quench_model is required for evolve");
    return build_tfim(lattice(), *quench_model);
  }
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  NTFS_CHECK(j.is_object(), SchemaError, where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    NTFS_CHECK(ok.count(it.key()), SchemaError, "unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline IsingParameters read_model(const json& j, const std::string& where) {
  check_keys(j, {"J", "h_T", "h_L"}, where);
  IsingParameters p;
  read(j, "J", p.J);
  read(j, "h_T", p.h_T);
  read(j, "h_L", p.h_L);
  return p;
}

inline void read_tdvp(const json& j, TdvpConfig& t, const std::string& where, const char* step_key) {
  check_keys(j, {step_key, "integrator", "svd_atol", "rcond", "n_samples", "max_retries",
                 "guard_factor"},
             where);
  read(j, step_key, t.step);
  if (j.contains("integrator")) t.integrator = integrator_from_string(j["integrator"].get<std::string>());
  read(j, "svd_atol", t.svd_atol);
  read(j, "rcond", t.rcond);
  read(j, "n_samples", t.sampler.n_samples);
  read(j, "max_retries", t.max_retries);
  read(j, "guard_factor", t.guard_factor);
}

inline json tdvp_json(const TdvpConfig& t, const char* step_key) {
  return {{step_key, t.step},
          {"integrator", to_string(t.integrator)},
          {"svd_atol", t.svd_atol},
          {"rcond", t.rcond},
          {"n_samples", t.sampler.n_samples},
          {"max_retries", t.max_retries},
          {"guard_factor", t.guard_factor}};
}

}  // namespace detail

/// Defaults for an architecture: RK2 SR for RBMO-like ansaetze and RK4 for
/// ARNNO, atol 1e-7 (imaginary) and 1e-8 (real).
inline RunConfig default_config(Preset preset) {
  RunConfig c;
  c.preset = preset;
  const PresetBudgets b = preset_budgets(preset);
  c.pite.n_samples = b.pite;
  c.sr.sampler.n_samples = b.sr;
  c.sr.svd_atol = 1e-7;
  c.sr.step = 1e-3;
  c.tvmc.sampler.n_samples = b.tvmc;
  c.tvmc.svd_atol = 1e-8;
  c.tvmc.step = 1e-3;
  return c;
}

/// Parses a run configuration over the preset's defaults. Unknown keys are
/// rejected.
inline RunConfig parse_config(const json& j, std::optional<Preset> preset_override = {}) {
  detail::check_keys(j, {"preset", "lattice", "model", "quench_model", "ansatz", "sampler", "pite",
                         "sr", "tvmc", "beta_target", "t_target", "observables", "checkpoint",
                         "ed", "metts", "output", "seed"},
                     "config");
  Preset preset = Preset::desk;
  if (j.contains("preset")) preset = preset_from_string(j["preset"].get<std::string>());
  if (preset_override) preset = *preset_override;
  RunConfig c = default_config(preset);

  if (j.contains("lattice")) {
    const json& l = j["lattice"];
    detail::check_keys(l, {"kind", "extent", "boundary"}, "lattice");
    if (l.contains("kind")) {
      const auto k = l["kind"].get<std::string>();
      NTFS_CHECK(k == "chain" || k == "square", SchemaError, "lattice.kind must be chain or square");
      c.lattice_kind = k == "chain" ? LatticeKind::chain : LatticeKind::square;
    }
    if (l.contains("extent")) {
      if (l["extent"].is_number_integer()) c.extent = {l["extent"].get<int>()};
      else detail::read(l, "extent", c.extent);
    }
    if (l.contains("boundary")) {
      const auto b = l["boundary"].get<std::string>();
      NTFS_CHECK(b == "open" || b == "periodic", SchemaError, "lattice.boundary must be open or periodic");
      c.boundary = b == "open" ? Boundary::open : Boundary::periodic;
    }
  }
  if (j.contains("model")) c.model = detail::read_model(j["model"], "model");
  if (j.contains("quench_model") && !j["quench_model"].is_null())
    c.quench_model = detail::read_model(j["quench_model"], "quench_model");

  if (j.contains("ansatz")) {
    const json& a = j["ansatz"];
    detail::check_keys(a, {"architecture", "hidden_density", "hidden_width", "sigma_init"}, "ansatz");
    if (a.contains("architecture"))
      c.ansatz.kind = architecture_from_string(a["architecture"].get<std::string>());
    detail::read(a, "hidden_density", c.ansatz.hidden_density);
    detail::read(a, "hidden_width", c.ansatz.hidden_width);
    detail::read(a, "sigma_init", c.ansatz.sigma_init);
  }
  if (c.ansatz.kind == Architecture::ARNNO_X || c.ansatz.kind == Architecture::ARNNO_Z)
    c.sr.integrator = c.tvmc.integrator = Integrator::RK4;

  if (j.contains("sampler")) {
    const json& s = j["sampler"];
    detail::check_keys(s, {"backend", "n_chains", "burn_in_sweeps", "sweep_factor"}, "sampler");
    detail::read(s, "backend", c.sampler_backend);
    detail::read(s, "n_chains", c.metropolis.n_chains);
    detail::read(s, "burn_in_sweeps", c.metropolis.burn_in_sweeps);
    detail::read(s, "sweep_factor", c.sweep_factor_override);
  }
  if (j.contains("pite")) {
    const json& p = j["pite"];
    detail::check_keys(p, {"dbeta", "beta_switch", "n_samples", "kernel_base", "max_iterations",
                           "learning_rate", "momentum", "target_infidelity", "relative_target",
                           "max_infidelity", "natural_gradient", "diag_shift", "kick",
                           "taylor_order", "enumerate"},
                       "pite");
    detail::read(p, "dbeta", c.pite.step);
    detail::read(p, "beta_switch", c.beta_switch);
    detail::read(p, "n_samples", c.pite.n_samples);
    detail::read(p, "kernel_base", c.pite.prior.kernel_base);
    detail::read(p, "max_iterations", c.pite.max_iterations);
    detail::read(p, "learning_rate", c.pite.learning_rate);
    detail::read(p, "momentum", c.pite.momentum);
    detail::read(p, "target_infidelity", c.pite.target_infidelity);
    detail::read(p, "relative_target", c.pite.relative_target);
    detail::read(p, "max_infidelity", c.pite.max_infidelity);
    detail::read(p, "natural_gradient", c.pite.natural_gradient);
    detail::read(p, "diag_shift", c.pite.diag_shift);
    detail::read(p, "kick", c.pite.kick);
    detail::read(p, "taylor_order", c.pite.taylor_order);
    detail::read(p, "enumerate", c.pite.enumerate);
  }
  if (j.contains("sr")) detail::read_tdvp(j["sr"], c.sr, "sr", "dbeta");
  if (j.contains("tvmc")) detail::read_tdvp(j["tvmc"], c.tvmc, "tvmc", "dt");
  detail::read(j, "beta_target", c.beta_target);
  detail::read(j, "t_target", c.t_target);
  if (j.contains("observables")) {
    const json& o = j["observables"];
    detail::check_keys(o, {"correlator_mode", "every", "n_samples"}, "observables");
    if (o.contains("correlator_mode")) {
      const auto m = o["correlator_mode"].get<std::string>();
      NTFS_CHECK(m == "bond_average" || m == "single_pair", SchemaError,
                 "correlator_mode must be bond_average or single_pair");
      c.correlator_mode = m == "bond_average" ? CorrelatorMode::bond_average : CorrelatorMode::single_pair;
    }
    detail::read(o, "every", c.observe_every);
    detail::read(o, "n_samples", c.observe_samples);
  }
  if (j.contains("checkpoint")) {
    const json& k = j["checkpoint"];
    detail::check_keys(k, {"every", "betas"}, "checkpoint");
    detail::read(k, "every", c.checkpoint_every);
    detail::read(k, "betas", c.checkpoint_betas);
  }
  if (j.contains("ed")) {
    const json& e = j["ed"];
    detail::check_keys(e, {"betas", "dt"}, "ed");
    detail::read(e, "betas", c.ed_betas);
    detail::read(e, "dt", c.ed_dt);
  }
  if (j.contains("metts")) {
    const json& m = j["metts"];
    detail::check_keys(m, {"n_samples", "discard", "rtol"}, "metts");
    detail::read(m, "n_samples", c.metts.n_samples);
    detail::read(m, "discard", c.metts.discard);
    detail::read(m, "rtol", c.metts.rtol);
  }
  detail::read(j, "output", c.output);
  detail::read(j, "seed", c.seed);

  c.ansatz.n_sites = c.lattice().n_sites();
  NTFS_CHECK(c.beta_target >= 0.0, SchemaError, "beta_target must be non-negative");
  NTFS_CHECK(c.t_target >= 0.0, SchemaError, "t_target must be non-negative");
  NTFS_CHECK(c.t_target == 0.0 || c.quench_model, SchemaError,
             "quench_model must be defined when t_target > 0");
  NTFS_CHECK(c.sr.step > 0.0 && c.tvmc.step > 0.0 && c.pite.step > 0.0, SchemaError,
             "time steps must be positive");
  NTFS_CHECK(c.sr.svd_atol > 0.0 && c.tvmc.svd_atol > 0.0, SchemaError, "svd_atol must be positive");
  NTFS_CHECK(c.observe_every >= 1, SchemaError, "observables.every must be >= 1");
  (void)sampler_backend_from_string(c.sampler_backend == "auto" ? "metropolis" : c.sampler_backend);

  const bool autoregressive =
      c.ansatz.kind == Architecture::ARNNO_X || c.ansatz.kind == Architecture::ARNNO_Z;
  SamplerBackend backend = autoregressive ? SamplerBackend::direct : SamplerBackend::metropolis;
  if (c.sampler_backend != "auto") backend = sampler_backend_from_string(c.sampler_backend);
  c.metropolis.sweep_factor =
      c.sweep_factor_override > 0 ? c.sweep_factor_override : (autoregressive ? 1 : 10);
  for (TdvpConfig* t : {&c.sr, &c.tvmc}) {
    t->sampler.backend = backend;
    t->sampler.metropolis = c.metropolis;
  }
  c.pite.enumerate = c.pite.enumerate || backend == SamplerBackend::enumeration;
  return c;
}

inline RunConfig load_config(const std::string& path, std::optional<Preset> preset = {}) {
  std::ifstream in(path);
  NTFS_CHECK(in.good(), SchemaError, "cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw SchemaError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j, preset);
}

/// Serialises a configuration; parse_config(to_json(c)) reproduces c.
inline json to_json(const RunConfig& c) {
  json j;
  j["preset"] = c.preset == Preset::paper ? "paper" : "desk";
  j["lattice"] = {{"kind", to_string(c.lattice_kind)}, {"extent", c.extent},
                  {"boundary", to_string(c.boundary)}};
  j["model"] = {{"J", c.model.J}, {"h_T", c.model.h_T}, {"h_L", c.model.h_L}};
  if (c.quench_model)
    j["quench_model"] = {{"J", c.quench_model->J}, {"h_T", c.quench_model->h_T},
                         {"h_L", c.quench_model->h_L}};
  j["ansatz"] = {{"architecture", to_string(c.ansatz.kind)},
                 {"hidden_density", c.ansatz.hidden_density},
                 {"hidden_width", c.ansatz.hidden_width},
                 {"sigma_init", c.ansatz.sigma_init}};
  j["sampler"] = {{"backend", c.sampler_backend},
                  {"n_chains", c.metropolis.n_chains},
                  {"burn_in_sweeps", c.metropolis.burn_in_sweeps},
                  {"sweep_factor", c.sweep_factor_override}};
  j["pite"] = {{"dbeta", c.pite.step},
               {"beta_switch", c.beta_switch},
               {"n_samples", c.pite.n_samples},
               {"kernel_base", c.pite.prior.kernel_base},
               {"max_iterations", c.pite.max_iterations},
               {"learning_rate", c.pite.learning_rate},
               {"momentum", c.pite.momentum},
               {"target_infidelity", c.pite.target_infidelity},
               {"relative_target", c.pite.relative_target},
               {"max_infidelity", c.pite.max_infidelity},
               {"natural_gradient", c.pite.natural_gradient},
               {"diag_shift", c.pite.diag_shift},
               {"kick", c.pite.kick},
               {"taylor_order", c.pite.taylor_order},
               {"enumerate", c.pite.enumerate}};
  j["sr"] = detail::tdvp_json(c.sr, "dbeta");
  j["tvmc"] = detail::tdvp_json(c.tvmc, "dt");
  j["beta_target"] = c.beta_target;
  j["t_target"] = c.t_target;
  j["observables"] = {{"correlator_mode", to_string(c.correlator_mode)},
                      {"every", c.observe_every},
                      {"n_samples", c.observe_samples}};
  j["checkpoint"] = {{"every", c.checkpoint_every}, {"betas", c.checkpoint_betas}};
  j["ed"] = {{"betas", c.ed_betas}, {"dt", c.ed_dt}};
  j["metts"] = {{"n_samples", c.metts.n_samples}, {"discard", c.metts.discard},
                {"rtol", c.metts.rtol}};
  j["output"] = c.output;
  j["seed"] = c.seed;
  return j;
}

}  // namespace ntfs
