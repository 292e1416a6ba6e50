// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/core.hpp"

#include <algorithm>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace ntfs {

enum class Pauli : std::uint8_t { I, X, Y, Z };

/// A weighted Pauli string in symplectic form. Site i carries
///   X if only x bit i is set, Z if only z bit i is set, Y if both are set.
/// Spin up is a clear bit. Conventions: Z|up> = |up>, X|up> = |down>,
/// Y|up> = i|down>, Y|down> = -i|up>.
struct PauliString {
  cplx coefficient{0.0, 0.0};
  std::uint64_t x_mask = 0;
  std::uint64_t z_mask = 0;

  [[nodiscard]] int n_y() const { return popcount(x_mask & z_mask); }

  /// coefficient * i^{#Y}; multiplying by (-1)^{popcount(z & ket)} gives the
  /// matrix element <ket ^ x | P | ket>.
  [[nodiscard]] cplx phase_coefficient() const {
    static constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return coefficient * kIPow[n_y() & 3];
  }

  [[nodiscard]] Pauli at(int site) const {
    const bool x = (x_mask >> site) & 1U;
    const bool z = (z_mask >> site) & 1U;
    if (x && z) return Pauli::Y;
    if (x) return Pauli::X;
    if (z) return Pauli::Z;
    return Pauli::I;
  }

  friend bool operator==(const PauliString& a, const PauliString& b) {
    return a.coefficient == b.coefficient && a.x_mask == b.x_mask &&
           a.z_mask == b.z_mask;
  }
};

struct RowEntry {
  std::uint64_t bits;
  cplx amplitude;
};

/// Weighted sum of Pauli strings on a fixed number of sites.
///
/// Terms with identical strings are merged on insertion and dropped when the
/// merged coefficient vanishes. Terms sharing an X/Y footprint are grouped so
/// that each connected configuration of a row is visited once.
class PauliOperator {
 public:
  PauliOperator() = default;
  explicit PauliOperator(int n_sites) : n_sites_(n_sites) {
    NTFS_CHECK(n_sites >= 0 && n_sites <= kMaxSites, ContractViolation,
               "PauliOperator supports at most 64 sites");
  }

  [[nodiscard]] int n_sites() const { return n_sites_; }
  [[nodiscard]] const std::vector<PauliString>& terms() const { return terms_; }
  [[nodiscard]] bool empty() const { return terms_.empty(); }

  PauliOperator& add(cplx coefficient,
                     std::initializer_list<std::pair<int, Pauli>> factors) {
    std::uint64_t x = 0, z = 0;
    for (auto [site, p] : factors) {
      NTFS_CHECK(site >= 0 && site < n_sites_, ContractViolation,
                 "Pauli factor site out of range");
      const std::uint64_t bit = std::uint64_t{1} << site;
      NTFS_CHECK(!((x | z) & bit), ContractViolation,
                 "Pauli string lists a site twice");
      if (p == Pauli::X || p == Pauli::Y) x |= bit;
      if (p == Pauli::Z || p == Pauli::Y) z |= bit;
    }
    return add_string(coefficient, x, z);
  }

  PauliOperator& add_string(cplx coefficient, std::uint64_t x_mask,
                            std::uint64_t z_mask) {
    NTFS_CHECK(((x_mask | z_mask) & ~low_mask(n_sites_)) == 0,
               ContractViolation, "Pauli string exceeds operator sites");
    auto it = std::find_if(terms_.begin(), terms_.end(), [&](const auto& t) {
      return t.x_mask == x_mask && t.z_mask == z_mask;
    });
    if (it == terms_.end()) {
      if (coefficient != cplx{0.0, 0.0})
        terms_.push_back({coefficient, x_mask, z_mask});
    } else {
      it->coefficient += coefficient;
      if (it->coefficient == cplx{0.0, 0.0}) terms_.erase(it);
    }
    rebuild_groups();
    return *this;
  }

  /// Visits every x' with <x|O|x'> != 0 as f(x', <x|O|x'>).
  template <class F>
  void for_each_in_row(std::uint64_t x, F&& f) const {
    for (const auto& g : groups_) {
      const std::uint64_t xp = x ^ g.x_mask;
      cplx amp{0.0, 0.0};
      for (const auto& [c, zm] : g.entries)
        amp += (popcount(zm & xp) & 1) ? -c : c;
      if (amp != cplx{0.0, 0.0}) f(xp, amp);
    }
  }

  /// Visits every x with <x|O|x'> != 0 as f(x, <x|O|x'>), i.e. O|x'>.
  template <class F>
  void for_each_in_column(std::uint64_t xp, F&& f) const {
    for (const auto& g : groups_) {
      cplx amp{0.0, 0.0};
      for (const auto& [c, zm] : g.entries)
        amp += (popcount(zm & xp) & 1) ? -c : c;
      if (amp != cplx{0.0, 0.0}) f(xp ^ g.x_mask, amp);
    }
  }

  [[nodiscard]] std::size_t n_connected_max() const { return groups_.size(); }

  [[nodiscard]] bool is_hermitian(double tol = 1e-12) const {
    // A Pauli string is Hermitian, so the sum is Hermitian iff every
    // coefficient is real.
    return std::all_of(terms_.begin(), terms_.end(), [tol](const auto& t) {
      return std::abs(t.coefficient.imag()) <= tol;
    });
  }

  PauliOperator& operator+=(const PauliOperator& o) {
    NTFS_CHECK(o.n_sites_ == n_sites_, ContractViolation,
               "adding operators on different site counts");
    for (const auto& t : o.terms_) add_string(t.coefficient, t.x_mask, t.z_mask);
    return *this;
  }
  PauliOperator& operator*=(cplx s) {
    for (auto& t : terms_) t.coefficient *= s;
    std::erase_if(terms_, [](const auto& t) {
      return t.coefficient == cplx{0.0, 0.0};
    });
    rebuild_groups();
    return *this;
  }
  friend PauliOperator operator+(PauliOperator a, const PauliOperator& b) {
    return a += b;
  }
  friend PauliOperator operator*(cplx s, PauliOperator a) { return a *= s; }
  friend PauliOperator operator-(PauliOperator a, const PauliOperator& b) {
    return a += cplx{-1.0, 0.0} * b;
  }

  /// Term-set equality up to ordering.
  [[nodiscard]] bool same_terms(const PauliOperator& o, double tol = 0.0) const {
    if (n_sites_ != o.n_sites_ || terms_.size() != o.terms_.size()) return false;
    for (const auto& t : terms_) {
      auto it = std::find_if(o.terms_.begin(), o.terms_.end(), [&](const auto& u) {
        return u.x_mask == t.x_mask && u.z_mask == t.z_mask;
      });
      if (it == o.terms_.end() || std::abs(it->coefficient - t.coefficient) > tol)
        return false;
    }
    return true;
  }

 private:
  struct Group {
    std::uint64_t x_mask;
    std::vector<std::pair<cplx, std::uint64_t>> entries;
  };

  void rebuild_groups() {
    groups_.clear();
    for (const auto& t : terms_) {
      auto it = std::find_if(groups_.begin(), groups_.end(),
                             [&](const Group& g) { return g.x_mask == t.x_mask; });
      if (it == groups_.end()) {
        groups_.push_back({t.x_mask, {}});
        it = std::prev(groups_.end());
      }
      it->entries.emplace_back(t.phase_coefficient(), t.z_mask);
    }
  }

  int n_sites_ = 0;
  std::vector<PauliString> terms_;
  std::vector<Group> groups_;
};

inline std::uint64_t bits_from_spins(std::span<const int> spins) {
  NTFS_CHECK(spins.size() <= kMaxSites, ContractViolation, "too many spins");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < spins.size(); ++i) {
    NTFS_CHECK(spins[i] == 1 || spins[i] == -1, ContractViolation,
               "spin values must be +1 or -1");
    if (spins[i] == -1) bits |= std::uint64_t{1} << i;
  }
  return bits;
}

inline std::vector<int> spins_from_bits(std::uint64_t bits, int n) {
  std::vector<int> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = spin_of(bits, i);
  return s;
}

/// Row <x|O|x'> of the operator for a +-1 spin assignment x.
inline std::vector<std::pair<std::vector<int>, cplx>> operator_row(
    const PauliOperator& op, std::span<const int> assignment) {
  NTFS_CHECK(static_cast<int>(assignment.size()) == op.n_sites(),
             ContractViolation, "assignment length differs from operator span");
  std::vector<std::pair<std::vector<int>, cplx>> row;
  op.for_each_in_row(bits_from_spins(assignment), [&](std::uint64_t b, cplx a) {
    row.emplace_back(spins_from_bits(b, op.n_sites()), a);
  });
  return row;
}

/// Column action O|x'> = sum_x <x|O|x'> |x>.
inline std::vector<std::pair<std::vector<int>, cplx>> operator_apply(
    const PauliOperator& op, std::span<const int> assignment) {
  NTFS_CHECK(static_cast<int>(assignment.size()) == op.n_sites(),
             ContractViolation, "assignment length differs from operator span");
  std::vector<std::pair<std::vector<int>, cplx>> col;
  op.for_each_in_column(bits_from_spins(assignment), [&](std::uint64_t b, cplx a) {
    col.emplace_back(spins_from_bits(b, op.n_sites()), a);
  });
  return col;
}

}  // namespace ntfs
