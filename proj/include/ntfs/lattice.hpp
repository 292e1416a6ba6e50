// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ntfs/core.hpp"
#include "ntfs/pauli.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace ntfs {

enum class LatticeKind { chain, square };
enum class Boundary { open, periodic };

/// Nearest-neighbour lattice with row-major site ordering.
///
/// Edges are stored as (i, j) with i < j, sorted and free of duplicates. On a
/// periodic axis of extent 2 the wrap-around bond coincides with the bulk bond
/// and is therefore stored once.
struct Lattice {
  LatticeKind kind = LatticeKind::chain;
  std::vector<int> extent;
  Boundary boundary = Boundary::open;
  std::vector<std::pair<int, int>> edges;

  [[nodiscard]] int n_sites() const {
    int n = 1;
    for (int e : extent) n *= e;
    return n;
  }
};

inline Lattice build_lattice(LatticeKind kind, std::vector<int> extent,
                             Boundary boundary) {
  const std::size_t dims = kind == LatticeKind::chain ? 1 : 2;
  NTFS_CHECK(extent.size() == dims, InvalidGeometry,
             "lattice extent has wrong dimensionality");
  for (int e : extent)
    NTFS_CHECK(e >= 2, InvalidGeometry, "lattice extent must be >= 2");

  Lattice lat{kind, std::move(extent), boundary, {}};
  NTFS_CHECK(lat.n_sites() <= kMaxSites, InvalidGeometry,
             "lattice exceeds the 64-site limit");

  auto add = [&](int a, int b) {
    if (a == b) return;
    lat.edges.emplace_back(std::min(a, b), std::max(a, b));
  };
  const bool pbc = boundary == Boundary::periodic;
  if (kind == LatticeKind::chain) {
    const int L = lat.extent[0];
    for (int i = 0; i + 1 < L; ++i) add(i, i + 1);
    if (pbc) add(L - 1, 0);
  } else {
    const int rows = lat.extent[0];
    const int cols = lat.extent[1];
    auto site = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (c + 1 < cols) add(site(r, c), site(r, c + 1));
        else if (pbc) add(site(r, c), site(r, 0));
        if (r + 1 < rows) add(site(r, c), site(r + 1, c));
        else if (pbc) add(site(r, c), site(0, c));
      }
    }
  }
  std::sort(lat.edges.begin(), lat.edges.end());
  lat.edges.erase(std::unique(lat.edges.begin(), lat.edges.end()),
                  lat.edges.end());
  return lat;
}

/// Critical transverse field at zero temperature, in units of J.
inline double critical_field(LatticeKind kind) {
  return kind == LatticeKind::chain ? 1.0 : 3.04438;
}

struct IsingParameters {
  double J = 1.0;
  double h_T = 0.0;
  double h_L = 0.0;
};

/// J sum_<ij> Z_i Z_j - h_T sum_i X_i + h_L sum_i Z_i
inline PauliOperator build_tfim(const Lattice& lattice, double J, double h_T,
                                double h_L) {
  PauliOperator H(lattice.n_sites());
  for (auto [i, j] : lattice.edges)
    H.add(J, {{i, Pauli::Z}, {j, Pauli::Z}});
  for (int i = 0; i < lattice.n_sites(); ++i) {
    H.add(-h_T, {{i, Pauli::X}});
    H.add(h_L, {{i, Pauli::Z}});
  }
  return H;
}

inline PauliOperator build_tfim(const Lattice& lattice,
                                const IsingParameters& p) {
  return build_tfim(lattice, p.J, p.h_T, p.h_L);
}

inline std::string to_string(LatticeKind k) {
  return k == LatticeKind::chain ? "chain" : "square";
}
inline std::string to_string(Boundary b) {
  return b == Boundary::open ? "open" : "periodic";
}

}  // namespace ntfs
