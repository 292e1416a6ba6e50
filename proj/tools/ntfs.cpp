// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line driver: prepare, evolve, ed, metts, compare, export-csv.

#include "ntfs/io/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCompareFailed = 2;
constexpr int kExitEvolutionFailed = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::string preset;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master rng seed (overrides the config)");
  cmd->add_option("--output", c.output, "output directory (overrides the config)");
  cmd->add_option("--preset", c.preset, "sample-budget preset")->check(CLI::IsMember({"desk", "paper"}));
}

ntfs::RunConfig load(const Common& c) {
  std::optional<ntfs::Preset> preset;
  if (!c.preset.empty()) preset = ntfs::preset_from_string(c.preset);
  ntfs::RunConfig cfg = ntfs::load_config(c.config, preset);
  if (c.seed) cfg.seed = *c.seed;
  if (c.output) cfg.output = *c.output;
  return cfg;
}

void print_record(const ntfs::TimeSeriesRecord& r) {
  std::printf("%-8s step %6ld  beta %.4f  t %.4f  E %+.6f", r.segment.c_str(), r.step, r.beta,
              r.t, r.energy.mean);
  for (const auto& [k, v] : r.observables)
    if (k != "energy_per_site") std::printf("  %s %+.5f(%.1e)", k.c_str(), v.mean, v.error);
  std::printf("\n");
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ntfs: neural thermofield states for spin lattices"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress per-record progress output");

  Common prep_opts, evo_opts, ed_opts, metts_opts;
  std::optional<std::string> resume;
  auto* prepare = app.add_subcommand("prepare", "thermal-state preparation (p-ITE then SR)");
  add_common(prepare, prep_opts);
  prepare->add_option("--resume", resume, "continue from a prepare checkpoint")->check(CLI::ExistingFile);

  std::string evolve_ckpt;
  auto* evolve = app.add_subcommand("evolve", "real-time t-VMC quench from a checkpoint");
  add_common(evolve, evo_opts);
  evolve->add_option("--checkpoint", evolve_ckpt, "prepared (or interrupted C3) checkpoint")
      ->required()
      ->check(CLI::ExistingFile);

  auto* ed = app.add_subcommand("ed", "exact-diagonalization thermal states and quench");
  add_common(ed, ed_opts);
  auto* metts = app.add_subcommand("metts", "METTS thermal estimates");
  add_common(metts, metts_opts);

  std::string series_a, series_b, axis = "auto";
  ntfs::CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "compare two series files");
  compare->add_option("a", series_a, "reference series")->required()->check(CLI::ExistingFile);
  compare->add_option("b", series_b, "series interpolated onto the reference grid")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--atol", cmp.atol, "absolute tolerance");
  compare->add_option("--nsigma", cmp.nsigma, "tolerance in combined standard errors");
  compare->add_option("--axis", axis, "comparison axis")->check(CLI::IsMember({"auto", "beta", "t"}));

  std::string csv_in, csv_out;
  int window = 1;
  auto* export_csv = app.add_subcommand("export-csv", "convert a series file to CSV");
  export_csv->add_option("series", csv_in, "series file")->required()->check(CLI::ExistingFile);
  export_csv->add_option("--output", csv_out, "CSV path (default: stdout)");
  export_csv->add_option("--window", window, "trailing moving-average window for means")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  const ntfs::RecordHook hook = quiet ? ntfs::RecordHook{} : ntfs::RecordHook{print_record};

  try {
    if (*prepare) {
      ntfs::run_prepare(load(prep_opts), resume, hook);
    } else if (*evolve) {
      ntfs::run_evolve(load(evo_opts), evolve_ckpt, hook);
    } else if (*ed) {
      for (const auto& r : ntfs::run_ed(load(ed_opts)))
        if (hook) hook(r);
    } else if (*metts) {
      for (const auto& r : ntfs::run_metts(load(metts_opts)))
        if (hook) hook(r);
    } else if (*compare) {
      if (axis == "beta") cmp.axis = ntfs::CompareOptions::Axis::beta;
      if (axis == "t") cmp.axis = ntfs::CompareOptions::Axis::t;
      const auto rep = ntfs::compare_series(ntfs::read_series(series_a), ntfs::read_series(series_b), cmp);
      std::printf("axis %s\n", rep.axis.c_str());
      for (const auto& o : rep.observables)
        std::printf("%-16s points %4d  max|d| %.3e  max d/sigma %.2f  %s\n", o.name.c_str(), o.points,
                    o.max_abs_delta, o.max_sigma_delta, o.pass ? "PASS" : "FAIL");
      return rep.pass() ? kExitOk : kExitCompareFailed;
    } else if (*export_csv) {
      const std::string text = ntfs::export_csv(ntfs::read_series(csv_in), window);
      if (csv_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(csv_out);
        out << text;
      }
    }
  } catch (const ntfs::EvolutionFailure& e) {
    std::fprintf(stderr, "evolution failure: %s\n", e.what());
    return kExitEvolutionFailed;
  } catch (const ntfs::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitOk;
}
