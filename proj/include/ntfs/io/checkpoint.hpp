// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/evolution/integrators.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace ntfs {

inline constexpr int kCheckpointLayoutVersion = 1;

/// Checkpoint file layout: one line of JSON (the header) terminated by '\n',
/// followed by the parameter block as little-endian IEEE-754 doubles. The
/// block holds complex128 (re, im pairs) for holomorphic ansaetze and float64
/// for real-parameter ones; `dtype` in the header says which.
///
/// Header keys: format, layout_version, architecture {kind, n_sites,
/// hidden_density, hidden_width, sigma_init}, dtype, n_parameters, beta, t,
/// segment, step, guard_reference, rng.
struct Checkpoint {
  EvolutionState state;
  std::string rng_state;
};

namespace detail {

inline void put_le_double(std::string& out, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, sizeof u);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  char b[8];
  std::memcpy(b, &u, 8);
  out.append(b, 8);
}

inline double get_le_double(const char* p) {
  std::uint64_t u;
  std::memcpy(&u, p, 8);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  double v;
  std::memcpy(&v, &u, sizeof v);
  return v;
}

}  // namespace detail

inline std::string rng_to_string(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

inline std::mt19937_64 rng_from_string(const std::string& s) {
  std::mt19937_64 rng;
  std::istringstream is(s);
  is >> rng;
  NTFS_CHECK(!is.fail(), SchemaError, "corrupt rng state in checkpoint");
  return rng;
}

inline std::string serialize_checkpoint(const EvolutionState& es, const std::mt19937_64& rng) {
  const ArchitectureSpec& a = es.state.spec();
  const bool complex_block = es.state.holomorphic();
  nlohmann::json h;
  h["format"] = "ntfs-checkpoint";
  h["layout_version"] = kCheckpointLayoutVersion;
  h["architecture"] = {{"kind", to_string(a.kind)},
                       {"n_sites", a.n_sites},
                       {"hidden_density", a.hidden_density},
                       {"hidden_width", a.hidden_width},
                       {"sigma_init", a.sigma_init}};
  h["dtype"] = complex_block ? "complex128" : "float64";
  h["n_parameters"] = es.state.n_parameters();
  h["beta"] = es.beta;
  h["t"] = es.t;
  h["segment"] = to_string(es.segment);
  h["step"] = es.step;
  h["guard_reference"] = es.guard_reference;
  h["rng"] = rng_to_string(rng);
  std::string out = h.dump() + "\n";
  const VectorXc& theta = es.state.parameters();
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    detail::put_le_double(out, theta[k].real());
    if (complex_block) detail::put_le_double(out, theta[k].imag());
  }
  return out;
}

inline Checkpoint deserialize_checkpoint(const std::string& bytes) {
  const auto nl = bytes.find('\n');
  NTFS_CHECK(nl != std::string::npos, SchemaError, "checkpoint has no header line");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("checkpoint header is not JSON: ") + e.what());
  }
  try {
    NTFS_CHECK(h.at("format") == "ntfs-checkpoint", SchemaError, "not an ntfs checkpoint");
    NTFS_CHECK(h.at("layout_version").get<int>() == kCheckpointLayoutVersion, SchemaError,
               "unsupported checkpoint layout version");
    const auto& a = h.at("architecture");
    ArchitectureSpec spec;
    spec.kind = architecture_from_string(a.at("kind").get<std::string>());
    spec.n_sites = a.at("n_sites").get<int>();
    spec.hidden_density = a.at("hidden_density").get<int>();
    spec.hidden_width = a.at("hidden_width").get<int>();
    spec.sigma_init = a.at("sigma_init").get<double>();
    VariationalState vs = VariationalState::blank(spec);
    const auto np = h.at("n_parameters").get<Eigen::Index>();
    NTFS_CHECK(np == vs.n_parameters(), SchemaError,
               "checkpoint parameter count does not match its architecture");
    const bool complex_block = h.at("dtype").get<std::string>() == "complex128";
    NTFS_CHECK(complex_block == vs.holomorphic(), SchemaError, "checkpoint dtype mismatch");
    const std::size_t need = static_cast<std::size_t>(np) * (complex_block ? 16 : 8);
    NTFS_CHECK(bytes.size() - nl - 1 == need, SchemaError, "checkpoint parameter block truncated");
    VectorXc theta(np);
    const char* p = bytes.data() + nl + 1;
    for (Eigen::Index k = 0; k < np; ++k) {
      const double re = detail::get_le_double(p);
      p += 8;
      double im = 0.0;
      if (complex_block) {
        im = detail::get_le_double(p);
        p += 8;
      }
      theta[k] = {re, im};
    }
    vs.set_parameters(theta);
    Checkpoint c{EvolutionState{std::move(vs)}, h.at("rng").get<std::string>()};
    c.state.beta = h.at("beta").get<double>();
    c.state.t = h.at("t").get<double>();
    c.state.segment = segment_from_string(h.at("segment").get<std::string>());
    c.state.step = h.at("step").get<long>();
    c.state.guard_reference = h.at("guard_reference").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed checkpoint header: ") + e.what());
  }
}

inline void write_checkpoint(const std::string& path, const EvolutionState& es,
                             const std::mt19937_64& rng) {
  const std::string bytes = serialize_checkpoint(es, rng);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    NTFS_CHECK(out.good(), SchemaError, "cannot write checkpoint '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  std::rename(tmp.c_str(), path.c_str());
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  NTFS_CHECK(in.good(), SchemaError, "cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace ntfs
