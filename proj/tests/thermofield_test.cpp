// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#include "ntfs/lattice.hpp"
#include "ntfs/oracles/ed.hpp"
#include "ntfs/thermofield.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ntfs {
namespace {

PauliOperator random_hermitian(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> mask(0, (std::uint64_t{1} << n) - 1);
  std::normal_distribution<double> g;
  PauliOperator op(n);
  for (int t = 0; t < 6; ++t) op.add_string(g(rng), mask(rng), mask(rng));
  return op;
}

MatrixXc doubled_dense_from_rows(const ThermofieldOperator& op, AuxBasis basis) {
  const int n = op.n_sites();
  const auto dim = Eigen::Index{1} << (2 * n);
  MatrixXc m = MatrixXc::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto x = DoubledConfiguration::from_index(n, static_cast<std::uint64_t>(k), basis);
    for_each_in_row(op, x, [&](const DoubledConfiguration& y, cplx a) {
      m(k, static_cast<Eigen::Index>(y.index())) += a;
    });
  }
  return m;
}

TEST(DoubledConfiguration, IndexRoundTrip) {
  for (std::uint64_t k = 0; k < 64; ++k) {
    const auto c = DoubledConfiguration::from_index(3, k, AuxBasis::X);
    EXPECT_EQ(c.index(), k);
    EXPECT_EQ(c.basis(), AuxBasis::X);
  }
  const std::vector<int> sigma{1, -1}, aux{-1, -1};
  const auto c = DoubledConfiguration::from_spins(sigma, aux, AuxBasis::Z);
  EXPECT_EQ(c.sigma(0), 1);
  EXPECT_EQ(c.sigma(1), -1);
  EXPECT_EQ(c.aux(0), -1);
  EXPECT_EQ(c.local_index(0), 1);
  EXPECT_EQ(c.local_index(1), 3);
  const std::vector<int> short_aux{1};
  EXPECT_THROW(DoubledConfiguration::from_spins(sigma, short_aux, AuxBasis::Z), ContractViolation);
}

TEST(IdentityAmplitude, Examples) {
  const std::vector<int> up{1}, down{-1};
  EXPECT_EQ(identity_amplitude(DoubledConfiguration::from_spins(up, up, AuxBasis::Z)), 1.0);
  EXPECT_EQ(identity_amplitude(DoubledConfiguration::from_spins(up, down, AuxBasis::Z)), 0.0);
  const std::vector<int> mixed{1, -1};
  EXPECT_EQ(identity_amplitude(DoubledConfiguration::from_spins(mixed, mixed, AuxBasis::Z)), 1.0);
  EXPECT_THROW(identity_amplitude(DoubledConfiguration::from_spins(up, up, AuxBasis::X)),
               BasisMismatch);
}

TEST(IdentityAmplitude, NormSquaredIsTwoToTheN) {
  for (int n = 1; n <= 6; ++n) {
    double norm = 0.0;
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << (2 * n)); ++k)
      norm += std::norm(identity_amplitude(DoubledConfiguration::from_index(n, k, AuxBasis::Z)));
    EXPECT_DOUBLE_EQ(norm, std::pow(2.0, n));
  }
}

TEST(RotatedIdentity, EqualsHadamardOfIdentity) {
  for (int n = 1; n <= 3; ++n) {
    const auto dim = Eigen::Index{1} << (2 * n);
    VectorXc rotated(dim);
    for (Eigen::Index k = 0; k < dim; ++k)
      rotated[k] = rotated_identity_amplitude(
          DoubledConfiguration::from_index(n, static_cast<std::uint64_t>(k), AuxBasis::X));
    EXPECT_LT((oracle::aux_x_to_z(rotated, n) - oracle::identity_vector(n)).norm(), 1e-13);
  }
  // N=1 pattern (1, 1, 1, -1) / sqrt 2 over local indices 0..3.
  for (int l = 0; l < 4; ++l) {
    const auto c = DoubledConfiguration(1, l >> 1, l & 1, AuxBasis::X);
    EXPECT_NEAR(rotated_identity_amplitude(c).real(), (l == 3 ? -1.0 : 1.0) / std::sqrt(2.0),
                1e-15);
  }
}

TEST(TildeConjugate, Examples) {
  PauliOperator y(1);
  y.add(1.0, {{0, Pauli::Y}});
  EXPECT_TRUE(tilde_conjugate(y).same_terms(cplx(-1.0) * y));

  const Lattice lat = build_lattice(LatticeKind::chain, {4}, Boundary::periodic);
  const PauliOperator H = build_tfim(lat, 1.0, 0.7, 0.3);
  EXPECT_TRUE(tilde_conjugate(H).same_terms(H));

  PauliOperator xy(2);
  xy.add(cplx(0.0, 1.0), {{0, Pauli::X}, {1, Pauli::Y}});
  EXPECT_TRUE(tilde_conjugate(xy).same_terms(xy));
}

TEST(TildeConjugate, IsEntrywiseConjugationAndInvolution) {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 3; ++n) {
    PauliOperator op = random_hermitian(n, rng);
    op.add_string(cplx(0.4, -0.9), 1, 0);
    const PauliOperator t = tilde_conjugate(op);
    EXPECT_LT((oracle::kron_dense(t) - oracle::kron_dense(op).conjugate()).norm(), 1e-13);
    EXPECT_TRUE(tilde_conjugate(t).same_terms(op, 1e-15));
  }
}

TEST(ThermofieldHamiltonian, KroneckerOracleForChain) {
  const Lattice lat = build_lattice(LatticeKind::chain, {2}, Boundary::open);
  PauliOperator H = build_tfim(lat, 1.0, 0.8, 0.3);
  H.add(0.6, {{0, Pauli::Y}, {1, Pauli::Z}});
  const ThermofieldOperator th = thermofield_hamiltonian(H);
  EXPECT_EQ(th.combination, Combination::difference);
  EXPECT_TRUE(th.auxiliary.same_terms(tilde_conjugate(H)));
  const MatrixXc rows = doubled_dense_from_rows(th, AuxBasis::Z);
  EXPECT_LT((rows - oracle::thermofield_dense(H)).norm(), 1e-13);
  EXPECT_LT((rows - oracle::doubled_dense(th)).norm(), 1e-13);
}

TEST(ThermofieldHamiltonian, HermitianTracelessWithZeroIdentityExpectation) {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 3; ++n) {
    const PauliOperator H = random_hermitian(n, rng);
    const MatrixXc m = oracle::doubled_dense(thermofield_hamiltonian(H));
    EXPECT_LT((m - m.adjoint()).norm(), 1e-12);
    EXPECT_NEAR(std::abs(m.trace()), 0.0, 1e-12);
    const VectorXc id = oracle::identity_vector(n);
    EXPECT_NEAR(std::abs(id.dot(m * id)), 0.0, 1e-12);
  }
}

TEST(ThermofieldHamiltonian, DiagonalHamiltonianAnnihilatesIdentity) {
  const Lattice lat = build_lattice(LatticeKind::chain, {3}, Boundary::periodic);
  const PauliOperator H = build_tfim(lat, 1.0, 0.0, 0.4);
  const MatrixXc m = doubled_dense_from_rows(thermofield_hamiltonian(H), AuxBasis::Z);
  EXPECT_LT((m * oracle::identity_vector(3)).norm(), 1e-13);
}

TEST(ThermofieldHamiltonian, RejectsNonHermitian) {
  PauliOperator op(1);
  op.add(cplx(0.0, 1.0), {{0, Pauli::X}});
  EXPECT_THROW(thermofield_hamiltonian(op), ContractViolation);
}

TEST(LiftPhysical, ActsOnPhysicalOnly) {
  PauliOperator zz(2);
  zz.add(1.0, {{0, Pauli::Z}, {1, Pauli::Z}});
  const ThermofieldOperator lifted = lift_physical(zz);
  EXPECT_EQ(lifted.combination, Combination::physical_only);
  const auto c = DoubledConfiguration(2, 0b01, 0b10, AuxBasis::Z);
  int visits = 0;
  for_each_in_row(lifted, c, [&](const DoubledConfiguration& y, cplx a) {
    ++visits;
    EXPECT_EQ(y, c);
    EXPECT_EQ(a, cplx(-1.0, 0.0));
  });
  EXPECT_EQ(visits, 1);
}

TEST(LiftPhysical, InfiniteTemperatureExpectationsVanish) {
  const int n = 2;
  const VectorXc id = oracle::identity_vector(n);
  PauliOperator z0(n), zz(n);
  z0.add(1.0, {{0, Pauli::Z}});
  zz.add(1.0, {{0, Pauli::Z}, {1, Pauli::Z}});
  for (const auto& op : {z0, zz}) {
    const MatrixXc m = oracle::doubled_dense(lift_physical(op));
    EXPECT_NEAR(std::abs(id.dot(m * id)), 0.0, 1e-14);
  }
}

TEST(RotateAuxiliary, ZBecomesX) {
  PauliOperator z(1);
  z.add(1.0, {{0, Pauli::Z}});
  PauliOperator x(1);
  x.add(1.0, {{0, Pauli::X}});
  const ThermofieldOperator op{z, z, Combination::difference, AuxBasis::Z};
  const ThermofieldOperator r = rotate_auxiliary(op);
  EXPECT_TRUE(r.auxiliary.same_terms(x));
  EXPECT_TRUE(r.physical.same_terms(z));
  EXPECT_EQ(r.aux_basis, AuxBasis::X);

  const ThermofieldOperator phys = lift_physical(z);
  EXPECT_TRUE(rotate_auxiliary(phys).physical.same_terms(z));
  EXPECT_TRUE(rotate_auxiliary(phys).auxiliary.empty());
}

TEST(RotateAuxiliary, MatchesExplicitHadamardConjugation) {
  std::mt19937_64 rng(9);
  for (int n = 1; n <= 2; ++n) {
    const PauliOperator H = random_hermitian(n, rng);
    const ThermofieldOperator th = thermofield_hamiltonian(H);
    const auto half = Eigen::Index{1} << n;
    const MatrixXc u = Eigen::kroneckerProduct(MatrixXc::Identity(half, half),
                                               oracle::hadamard(n)).eval();
    const MatrixXc expected = u * oracle::doubled_dense(th) * u;
    EXPECT_LT((doubled_dense_from_rows(rotate_auxiliary(th), AuxBasis::X) - expected).norm(),
              1e-12);
  }
}

TEST(RotateAuxiliary, InvolutionPreservingHermiticity) {
  std::mt19937_64 rng(10);
  const ThermofieldOperator th = thermofield_hamiltonian(random_hermitian(3, rng));
  const ThermofieldOperator twice = rotate_auxiliary(rotate_auxiliary(th));
  EXPECT_TRUE(twice.auxiliary.same_terms(th.auxiliary, 1e-15));
  EXPECT_EQ(twice.aux_basis, AuxBasis::Z);
  EXPECT_TRUE(rotate_auxiliary(th).auxiliary.is_hermitian());
}

TEST(ForEachInRow, BasisMismatchIsRejected) {
  PauliOperator x(1);
  x.add(1.0, {{0, Pauli::X}});
  const ThermofieldOperator th = thermofield_hamiltonian(x);
  EXPECT_THROW(for_each_in_row(th, DoubledConfiguration(1, 0, 0, AuxBasis::X),
                               [](const DoubledConfiguration&, cplx) {}),
               BasisMismatch);
}

}  // namespace
}  // namespace ntfs
