// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#include "ntfs/io/run.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace ntfs {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("ntfs_io_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

json small_run(const std::string& output) {
  json j = json::parse(R"({
    "lattice": {"kind": "chain", "extent": 2, "boundary": "periodic"},
    "model": {"J": 1.0, "h_T": 1.5, "h_L": 0.0},
    "quench_model": {"J": 1.0, "h_T": 0.5, "h_L": 0.0},
    "ansatz": {"architecture": "MeanFieldWrapped"},
    "sampler": {"backend": "metropolis", "n_chains": 4, "burn_in_sweeps": 10},
    "pite": {"dbeta": 0.01, "beta_switch": 0.04, "n_samples": 256, "max_infidelity": 1e-2},
    "sr": {"dbeta": 0.01, "n_samples": 256},
    "tvmc": {"dt": 0.01, "n_samples": 256},
    "beta_target": 0.1,
    "t_target": 0.05,
    "observables": {"every": 2, "n_samples": 256},
    "checkpoint": {"betas": [0.06]},
    "seed": 11
  })");
  j["output"] = output;
  return j;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(Config, DefaultsAndPresets) {
  const RunConfig desk = parse_config(json::object());
  EXPECT_EQ(desk.sr.sampler.n_samples, 8192);
  EXPECT_EQ(desk.pite.n_samples, 2048);
  EXPECT_EQ(desk.ansatz.n_sites, 4);
  const RunConfig paper = parse_config(json{{"preset", "paper"}});
  EXPECT_EQ(paper.sr.sampler.n_samples, 65536);
  EXPECT_EQ(paper.tvmc.sampler.n_samples, 500000);
  EXPECT_EQ(parse_config(json{{"preset", "paper"}}, Preset::desk).sr.sampler.n_samples, 8192);
}

TEST(Config, AutoBackendFollowsArchitecture) {
  const RunConfig rbm = parse_config(json::object());
  EXPECT_EQ(rbm.sr.sampler.backend, SamplerBackend::metropolis);
  EXPECT_EQ(rbm.metropolis.sweep_factor, 10);
  const RunConfig ar = parse_config(json{{"ansatz", {{"architecture", "ARNNO_X"}}}});
  EXPECT_EQ(ar.sr.sampler.backend, SamplerBackend::direct);
  EXPECT_EQ(ar.sr.integrator, Integrator::RK4);
}

TEST(Config, StrictParsing) {
  EXPECT_THROW(parse_config(json{{"colour", 1}}), SchemaError);
  EXPECT_THROW(parse_config(json{{"sr", {{"dt", 0.1}}}}), SchemaError);
  EXPECT_THROW(parse_config(json{{"ansatz", {{"architecture", "CNN"}}}}), SchemaError);
  EXPECT_THROW(parse_config(json{{"t_target", 1.0}}), SchemaError);
  EXPECT_THROW(parse_config(json{{"sr", {{"dbeta", -0.1}}}}), SchemaError);
  EXPECT_THROW(parse_config(json{{"lattice", {{"extent", 1}}}}), InvalidGeometry);
  EXPECT_THROW(parse_config(json{{"sampler", {{"backend", "gibbs"}}}}), SchemaError);
  EXPECT_THROW(parse_config(json{{"preset", "laptop"}}), SchemaError);
}

TEST(Config, ShippedConfigsParse) {
  int count = 0;
  for (const auto& e : std::filesystem::directory_iterator(NTFS_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    const RunConfig c = load_config(e.path().string());
    EXPECT_GE(c.lattice().n_sites(), 4) << e.path();
    EXPECT_EQ(parse_config(to_json(c)).ansatz, c.ansatz) << e.path();
    ++count;
  }
  EXPECT_GE(count, 4);
}

TEST(Config, RoundTrip) {
  const RunConfig c = parse_config(small_run("somewhere"));
  const json j = to_json(c);
  EXPECT_EQ(to_json(parse_config(j)), j);
  EXPECT_EQ(c.quench_model->h_T, 0.5);
  EXPECT_EQ(c.checkpoint_betas, std::vector<double>{0.06});
}

TEST(Config, LoadsFileWithComments) {
  TempDir dir;
  std::ofstream(dir.file("c.json")) << "{ // budget\n \"beta_target\": 0.5 }";
  EXPECT_EQ(load_config(dir.file("c.json")).beta_target, 0.5);
  std::ofstream(dir.file("bad.json")) << "{ beta_target: }";
  EXPECT_THROW(load_config(dir.file("bad.json")), SchemaError);
  EXPECT_THROW(load_config(dir.file("missing.json")), SchemaError);
}

TEST(Checkpoint, ByteIdenticalRoundTrip) {
  std::mt19937_64 rng(3);
  for (Architecture kind : {Architecture::RBMO, Architecture::ARNNO_X, Architecture::ARNNO_Z,
                            Architecture::MeanFieldWrapped}) {
    EvolutionState es{VariationalState::identity({kind, 3, 2, 5, 0.01}, rng)};
    es.beta = 0.123456789;
    es.t = 1.0 / 3.0;
    es.step = 42;
    es.segment = Segment::C2_sr;
    es.guard_reference = 0.75;
    rng.discard(17);
    const std::string bytes = serialize_checkpoint(es, rng);
    const Checkpoint ck = deserialize_checkpoint(bytes);
    EXPECT_EQ(serialize_checkpoint(ck.state, rng_from_string(ck.rng_state)), bytes);
    EXPECT_EQ(ck.state.state.parameters(), es.state.parameters());
    EXPECT_EQ(ck.state.beta, es.beta);
    EXPECT_EQ(ck.state.t, es.t);
    EXPECT_EQ(ck.state.step, 42);
    EXPECT_EQ(ck.state.state.spec(), es.state.spec());
    EXPECT_EQ(rng_from_string(ck.rng_state), rng);
  }
}

TEST(Checkpoint, RejectsCorruptFiles) {
  std::mt19937_64 rng(4);
  const EvolutionState es{VariationalState::identity({Architecture::RBMO, 2}, rng)};
  const std::string bytes = serialize_checkpoint(es, rng);
  EXPECT_THROW(deserialize_checkpoint("no header"), SchemaError);
  EXPECT_THROW(deserialize_checkpoint("{oops\n"), SchemaError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), SchemaError);
  std::string wrong_version = bytes;
  const auto pos = wrong_version.find("\"layout_version\":1");
  ASSERT_NE(pos, std::string::npos);
  wrong_version.replace(pos, 18, "\"layout_version\":9");
  EXPECT_THROW(deserialize_checkpoint(wrong_version), SchemaError);
}

TEST(Series, JsonLinesRoundTrip) {
  TempDir dir;
  TimeSeriesRecord r;
  r.segment = "C2_sr";
  r.step = 3;
  r.beta = 0.25;
  r.observables["ZZ"] = {0.5, 0.01, 1e-4};
  r.energy = {-1.0, 0.02, 0.0};
  r.diagnostics["force_snr"] = 12.0;
  r.diagnostics["undefined"] = std::nan("");
  append_record(dir.file("s.jsonl"), r);
  append_record(dir.file("s.jsonl"), r);
  const auto rows = read_series(dir.file("s.jsonl"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].observables.at("ZZ").error, 0.01);
  EXPECT_EQ(to_json(rows[0]), to_json(r));
  EXPECT_TRUE(std::isnan(rows[0].diagnostics.at("undefined")));
  std::ofstream(dir.file("bad.jsonl")) << "{\"segment\": 1}\n";
  EXPECT_THROW(read_series(dir.file("bad.jsonl")), SchemaError);
}

std::vector<TimeSeriesRecord> ramp(double slope, double err, int n = 5) {
  std::vector<TimeSeriesRecord> rows;
  for (int k = 0; k < n; ++k) {
    TimeSeriesRecord r;
    r.segment = "C2_sr";
    r.step = k;
    r.beta = 0.1 * k;
    r.observables["X"] = {slope * r.beta, err, 0.0};
    r.observables["ZZ"] = {1.0, err, 0.0};
    rows.push_back(r);
  }
  return rows;
}

TEST(Series, CompareSelfAndIntersection) {
  const auto a = ramp(1.0, 0.0);
  const CompareReport self = compare_series(a, a);
  EXPECT_TRUE(self.pass());
  for (const auto& o : self.observables) EXPECT_EQ(o.max_abs_delta, 0.0);
  EXPECT_EQ(self.axis, "beta");

  auto b = ramp(1.5, 0.0, 3);  // covers beta <= 0.2 only
  for (auto& r : b) r.observables.erase("ZZ");
  const CompareReport rep = compare_series(a, b);
  ASSERT_EQ(rep.observables.size(), 1u);
  EXPECT_EQ(rep.observables[0].points, 3);
  EXPECT_NEAR(rep.observables[0].max_abs_delta, 0.1, 1e-12);
  EXPECT_FALSE(rep.pass());
  EXPECT_TRUE(compare_series(a, b, {0.2, 3.0}).pass());
  // Statistical tolerance: 3 sigma of 0.07 covers the largest gap of 0.2.
  EXPECT_TRUE(compare_series(ramp(1.0, 0.07), ramp(1.5, 0.0)).pass());
  EXPECT_FALSE(compare_series(ramp(1.0, 0.05), ramp(1.5, 0.0)).pass());
}

TEST(Series, CompareInterpolatesOntoReferenceGrid) {
  auto a = ramp(2.0, 0.0);
  std::vector<TimeSeriesRecord> b{a.front(), a.back()};
  const CompareReport rep = compare_series(a, b, {1e-12, 0.0});
  EXPECT_TRUE(rep.pass());
  EXPECT_EQ(rep.observables[0].points, 5);
}

TEST(Series, CsvMovingAverage) {
  const auto rows = ramp(1.0, 0.0, 4);
  const std::string raw = export_csv(rows);
  EXPECT_EQ(raw.substr(0, raw.find('\n')),
            "segment,step,beta,t,X_mean,X_stderr,ZZ_mean,ZZ_stderr,energy_mean,energy_stderr");
  const std::string smooth = export_csv(rows, 2);
  std::istringstream in(smooth);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[3].substr(0, lines[3].find(",0,1,")), "C2_sr,3,0.3,0,0.25");
  EXPECT_THROW(export_csv(rows, 0), ContractViolation);
}

TEST(Run, ResumeIsBitwiseIdentical) {
  TempDir dir;
  const RunConfig full_cfg = parse_config(small_run(dir.file("full")));
  const EvolutionState full = run_prepare(full_cfg);
  EXPECT_NEAR(full.beta, 0.1, 1e-12);
  const std::string mark = make_paths(full_cfg).beta_checkpoint(0.06);
  ASSERT_TRUE(fs::exists(mark));

  const RunConfig resume_cfg = parse_config(small_run(dir.file("resumed")));
  const EvolutionState resumed = run_prepare(resume_cfg, mark);
  EXPECT_EQ(resumed.state.parameters(), full.state.parameters());
  EXPECT_EQ(slurp(make_paths(resume_cfg).prepare_checkpoint()),
            slurp(make_paths(full_cfg).prepare_checkpoint()));

  const auto series = read_series(make_paths(full_cfg).prepare_series());
  EXPECT_EQ(series.front().segment, "C1_pite");
  EXPECT_EQ(series.back().segment, "C2_sr");
  EXPECT_NEAR(series.back().beta, 0.1, 1e-12);

  const EvolutionState evolved = run_evolve(full_cfg, make_paths(full_cfg).prepare_checkpoint());
  EXPECT_NEAR(evolved.t, 0.05, 1e-12);
  EXPECT_EQ(evolved.segment, Segment::C3_tvmc);
  const auto ev = read_series(make_paths(full_cfg).evolve_series());
  EXPECT_EQ(ev.front().t, 0.0);
  EXPECT_NEAR(ev.back().t, 0.05, 1e-12);
}

TEST(Run, EdAndMettsSeries) {
  TempDir dir;
  json j = small_run(dir.file("oracle"));
  j["ed"] = {{"betas", {0.0, 0.5}}, {"dt", 0.025}};
  j["metts"] = {{"n_samples", 200}, {"discard", 5}};
  const RunConfig cfg = parse_config(j);
  const auto ed = run_ed(cfg);
  ASSERT_EQ(ed.size(), 2u + 3u);
  EXPECT_EQ(ed[0].segment, "ED_thermal");
  EXPECT_EQ(ed[2].segment, "ED_evolve");
  EXPECT_NEAR(ed[0].observables.at("ZZ").mean, 0.0, 1e-14);
  const auto metts = run_metts(cfg);
  ASSERT_EQ(metts.size(), 2u);
  EXPECT_TRUE(compare_series(ed, metts, {1e-12, 4.0}).pass());
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(NTFS_CLI) + " -q " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  write_series(dir.file("a.jsonl"), ramp(1.0, 0.0));
  write_series(dir.file("b.jsonl"), ramp(3.0, 0.0));
  EXPECT_EQ(run_cli("compare " + dir.file("a.jsonl") + " " + dir.file("a.jsonl")), 0);
  EXPECT_EQ(run_cli("compare " + dir.file("a.jsonl") + " " + dir.file("b.jsonl")), 2);
  EXPECT_EQ(run_cli("export-csv " + dir.file("a.jsonl") + " --window 3 --output " + dir.file("a.csv")), 0);
  EXPECT_TRUE(fs::exists(dir.file("a.csv")));

  std::ofstream(dir.file("bad.json")) << R"({"unknown": true})";
  EXPECT_EQ(run_cli("ed " + dir.file("bad.json")), 1);
  std::ofstream(dir.file("ed.json")) << small_run(dir.file("out")).dump();
  EXPECT_EQ(run_cli("ed " + dir.file("ed.json")), 0);
  EXPECT_TRUE(fs::exists(dir.file("out/ed.jsonl")));
  EXPECT_NE(run_cli("no-such-command"), 0);
}

}  // namespace
}  // namespace ntfs
