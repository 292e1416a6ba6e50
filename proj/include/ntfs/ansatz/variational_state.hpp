// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/ansatz/arnno.hpp"
#include "ntfs/ansatz/jastrow.hpp"
#include "ntfs/ansatz/mean_field.hpp"
#include "ntfs/ansatz/rbmo.hpp"

#include <random>
#include <string>
#include <string_view>
#include <variant>

namespace ntfs {

enum class Architecture { RBMO, ARNNO_Z, ARNNO_X, MeanFieldWrapped };

using MeanFieldJastrow = MeanFieldWrapped<PairJastrow>;

inline std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::RBMO: return "RBMO";
    case Architecture::ARNNO_Z: return "ARNNO_Z";
    case Architecture::ARNNO_X: return "ARNNO_X";
    case Architecture::MeanFieldWrapped: return "MeanFieldWrapped";
  }
  return "?";
}

inline Architecture architecture_from_string(std::string_view s) {
  if (s == "RBMO") return Architecture::RBMO;
  if (s == "ARNNO_Z") return Architecture::ARNNO_Z;
  if (s == "ARNNO_X") return Architecture::ARNNO_X;
  if (s == "MeanFieldWrapped") return Architecture::MeanFieldWrapped;
  throw SchemaError("unknown architecture '" + std::string(s) + "'");
}

/// Architecture plus the hyperparameters that fix the parameter count.
struct ArchitectureSpec {
  Architecture kind = Architecture::RBMO;
  int n_sites = 0;
  int hidden_density = 1;  // RBMO: M = alpha N
  int hidden_width = 8;    // ARNNO: LSTM width
  double sigma_init = 0.01;

  friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

/// Architecture descriptor plus model. Algorithms are templates over
/// WaveFunction; `visit` dispatches to the concrete model.
class VariationalState {
 public:
  using Model = std::variant<Rbmo, Arnno, MeanFieldJastrow>;

  VariationalState(ArchitectureSpec spec, Model model)
      : spec_(spec), model_(std::move(model)) {}

  /// Exact infinite-temperature state for the given architecture. The rng is
  /// consumed only by ARNNO initialisation.
  static VariationalState identity(const ArchitectureSpec& spec, std::mt19937_64& rng) {
    switch (spec.kind) {
      case Architecture::RBMO:
        return {spec, Rbmo::identity(spec.n_sites, spec.hidden_density)};
      case Architecture::ARNNO_Z:
        return {spec, Arnno::identity(spec.n_sites, spec.hidden_width, AuxBasis::Z,
                                      spec.sigma_init, rng)};
      case Architecture::ARNNO_X:
        return {spec, Arnno::identity(spec.n_sites, spec.hidden_width, AuxBasis::X,
                                      spec.sigma_init, rng)};
      case Architecture::MeanFieldWrapped:
        return {spec, MeanFieldJastrow(PairJastrow(spec.n_sites))};
    }
    throw ContractViolation("unhandled architecture");
  }

  /// Zero-initialised model of the right shape, for loading checkpoints.
  static VariationalState blank(const ArchitectureSpec& spec) {
    switch (spec.kind) {
      case Architecture::RBMO:
        return {spec, Rbmo(spec.n_sites, spec.hidden_density * spec.n_sites)};
      case Architecture::ARNNO_Z:
        return {spec, Arnno(spec.n_sites, spec.hidden_width, AuxBasis::Z)};
      case Architecture::ARNNO_X:
        return {spec, Arnno(spec.n_sites, spec.hidden_width, AuxBasis::X)};
      case Architecture::MeanFieldWrapped:
        return {spec, MeanFieldJastrow(PairJastrow(spec.n_sites))};
    }
    throw ContractViolation("unhandled architecture");
  }

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), model_);
  }
  template <class F>
  decltype(auto) visit(F&& f) {
    return std::visit(std::forward<F>(f), model_);
  }

  [[nodiscard]] const ArchitectureSpec& spec() const { return spec_; }
  [[nodiscard]] Architecture architecture() const { return spec_.kind; }
  [[nodiscard]] AuxBasis basis() const {
    return visit([](const auto& m) { return m.basis(); });
  }
  [[nodiscard]] bool holomorphic() const {
    return visit([](const auto& m) { return std::decay_t<decltype(m)>::holomorphic; });
  }
  [[nodiscard]] bool autoregressive() const { return std::holds_alternative<Arnno>(model_); }
  [[nodiscard]] int n_sites() const { return spec_.n_sites; }
  [[nodiscard]] Eigen::Index n_parameters() const {
    return visit([](const auto& m) { return m.n_parameters(); });
  }
  [[nodiscard]] const VectorXc& parameters() const {
    return visit([](const auto& m) -> const VectorXc& { return m.parameters(); });
  }
  void set_parameters(const VectorXc& theta) {
    visit([&](auto& m) { m.set_parameters(theta); });
  }
  [[nodiscard]] cplx log_amplitude(const DoubledConfiguration& c) const {
    return visit([&](const auto& m) { return m.log_amplitude(c); });
  }

 private:
  ArchitectureSpec spec_;
  Model model_;
};

}  // namespace ntfs
