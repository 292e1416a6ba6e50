// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/core.hpp"
#include "ntfs/pauli.hpp"

#include <cmath>
#include <functional>
#include <span>
#include <string>

namespace ntfs {

/// Basis of the auxiliary copy: Z eigenstates, or X eigenstates after a
/// Hadamard rotation of every auxiliary spin.
enum class AuxBasis : std::uint8_t { Z, X };

inline std::string to_string(AuxBasis b) { return b == AuxBasis::Z ? "Z" : "X"; }

/// Joint assignment of N physical and N auxiliary spins.
///
/// Spins are stored as bit masks: a set bit is spin down (physical, or
/// auxiliary in the Z basis) or |-> (auxiliary in the X basis).
class DoubledConfiguration {
 public:
  DoubledConfiguration() = default;
  DoubledConfiguration(int n, std::uint64_t physical, std::uint64_t auxiliary,
                       AuxBasis basis)
      : physical_(physical & low_mask(n)),
        auxiliary_(auxiliary & low_mask(n)),
        n_(n),
        basis_(basis) {
    NTFS_CHECK(n >= 1 && n <= kMaxSites, ContractViolation,
               "configuration size out of range");
  }

  static DoubledConfiguration from_spins(std::span<const int> sigma,
                                         std::span<const int> aux,
                                         AuxBasis basis) {
    NTFS_CHECK(sigma.size() == aux.size(), ContractViolation,
               "physical and auxiliary lengths differ");
    return {static_cast<int>(sigma.size()), bits_from_spins(sigma),
            bits_from_spins(aux), basis};
  }

  [[nodiscard]] int n_sites() const { return n_; }
  [[nodiscard]] AuxBasis basis() const { return basis_; }
  [[nodiscard]] std::uint64_t physical() const { return physical_; }
  [[nodiscard]] std::uint64_t auxiliary() const { return auxiliary_; }
  [[nodiscard]] int sigma(int i) const { return spin_of(physical_, i); }
  [[nodiscard]] int aux(int i) const { return spin_of(auxiliary_, i); }

  /// Local basis index 2*[sigma down] + [aux down/minus], in 0..3.
  [[nodiscard]] int local_index(int i) const {
    return static_cast<int>(2 * ((physical_ >> i) & 1U) + ((auxiliary_ >> i) & 1U));
  }

  [[nodiscard]] DoubledConfiguration with_physical(std::uint64_t bits) const {
    return {n_, bits, auxiliary_, basis_};
  }
  [[nodiscard]] DoubledConfiguration with_auxiliary(std::uint64_t bits) const {
    return {n_, physical_, bits, basis_};
  }

  /// Index in the 4^N doubled basis: (physical << N) | auxiliary.
  [[nodiscard]] std::uint64_t index() const { return (physical_ << n_) | auxiliary_; }
  static DoubledConfiguration from_index(int n, std::uint64_t index, AuxBasis b) {
    return {n, index >> n, index & low_mask(n), b};
  }

  friend bool operator==(const DoubledConfiguration& a, const DoubledConfiguration& b) {
    return a.physical_ == b.physical_ && a.auxiliary_ == b.auxiliary_ &&
           a.n_ == b.n_ && a.basis_ == b.basis_;
  }

 private:
  std::uint64_t physical_ = 0;
  std::uint64_t auxiliary_ = 0;
  int n_ = 0;
  AuxBasis basis_ = AuxBasis::Z;
};

struct ConfigurationHash {
  std::size_t operator()(const DoubledConfiguration& c) const noexcept {
    std::uint64_t h = c.physical() * 0x9E3779B97F4A7C15ULL;
    h ^= c.auxiliary() + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Unnormalised identity state: 1 when sigma_i == s_i at every site, else 0.
inline cplx identity_amplitude(const DoubledConfiguration& c) {
  NTFS_CHECK(c.basis() == AuxBasis::Z, BasisMismatch,
             "identity_amplitude expects an AuxZ configuration");
  return c.physical() == c.auxiliary() ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
}

/// Identity state after Hadamard rotation of the auxiliary spins:
/// (1/sqrt2)^N times -1 for every site in (down, -).
inline cplx rotated_identity_amplitude(const DoubledConfiguration& c) {
  NTFS_CHECK(c.basis() == AuxBasis::X, BasisMismatch,
             "rotated_identity_amplitude expects an AuxX configuration");
  const int minus = popcount(c.physical() & c.auxiliary());
  const double mag = std::pow(0.5, 0.5 * c.n_sites());
  return (minus & 1) ? cplx{-mag, 0.0} : cplx{mag, 0.0};
}

/// Operator with matrix elements conjugated in the same basis:
/// X -> X, Z -> Z, Y -> -Y, coefficients conjugated.
inline PauliOperator tilde_conjugate(const PauliOperator& op) {
  PauliOperator out(op.n_sites());
  for (const auto& t : op.terms()) {
    const cplx c = std::conj(t.coefficient) * ((t.n_y() & 1) ? -1.0 : 1.0);
    out.add_string(c, t.x_mask, t.z_mask);
  }
  return out;
}

/// Per-site Hadamard conjugation: X <-> Z, Y -> -Y.
inline PauliOperator hadamard_conjugate(const PauliOperator& op) {
  PauliOperator out(op.n_sites());
  for (const auto& t : op.terms()) {
    const cplx c = t.coefficient * ((t.n_y() & 1) ? -1.0 : 1.0);
    out.add_string(c, t.z_mask, t.x_mask);
  }
  return out;
}

enum class Combination { physical_only, difference };

/// Operator on the doubled space, either O (x) 1 or P (x) 1 - 1 (x) A.
/// `aux_basis` records the basis the auxiliary part is written in.
struct ThermofieldOperator {
  PauliOperator physical;
  PauliOperator auxiliary;
  Combination combination = Combination::physical_only;
  AuxBasis aux_basis = AuxBasis::Z;

  [[nodiscard]] int n_sites() const { return physical.n_sites(); }
};

inline ThermofieldOperator lift_physical(const PauliOperator& op) {
  return {op, PauliOperator(op.n_sites()), Combination::physical_only, AuxBasis::Z};
}

/// H (x) 1 - 1 (x) H~ for Hermitian H.
inline ThermofieldOperator thermofield_hamiltonian(const PauliOperator& H) {
  NTFS_CHECK(H.is_hermitian(), ContractViolation,
             "thermofield_hamiltonian requires a Hermitian operator");
  return {H, tilde_conjugate(H), Combination::difference, AuxBasis::Z};
}

/// Conjugates the auxiliary part by the per-site Hadamard; physical part and
/// physical-only operators are untouched apart from the basis tag.
inline ThermofieldOperator rotate_auxiliary(const ThermofieldOperator& op) {
  ThermofieldOperator out = op;
  out.auxiliary = hadamard_conjugate(op.auxiliary);
  out.aux_basis = op.aux_basis == AuxBasis::Z ? AuxBasis::X : AuxBasis::Z;
  return out;
}

/// Thermofield operator expressed in the basis a configuration uses.
inline ThermofieldOperator in_basis(const ThermofieldOperator& op, AuxBasis basis) {
  return op.aux_basis == basis ? op : rotate_auxiliary(op);
}

/// Visits every x' with <x|Op|x'> != 0 in the doubled space.
template <class F>
void for_each_in_row(const ThermofieldOperator& op, const DoubledConfiguration& x,
                     F&& f) {
  op.physical.for_each_in_row(x.physical(), [&](std::uint64_t b, cplx a) {
    f(x.with_physical(b), a);
  });
  if (op.combination == Combination::difference) {
    NTFS_CHECK(op.aux_basis == x.basis(), BasisMismatch,
               "thermofield operator and configuration use different aux bases");
    op.auxiliary.for_each_in_row(x.auxiliary(), [&](std::uint64_t b, cplx a) {
      f(x.with_auxiliary(b), -a);
    });
  }
}

}  // namespace ntfs
