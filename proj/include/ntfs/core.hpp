// Copyright 2026 The ntfs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ntfs {

using cplx = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr int kMaxSites = 64;

// Error hierarchy. Everything thrown by the library derives from ntfs::Error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidGeometry : Error {
  using Error::Error;
};
struct BasisMismatch : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct CapacityError : Error {
  using Error::Error;
};
struct ContractViolation : Error {
  using Error::Error;
};
struct SeedingError : Error {
  using Error::Error;
};
struct SchemaError : Error {
  using Error::Error;
};
struct EvolutionFailure : Error {
  using Error::Error;
};

#define NTFS_CHECK(cond, ExceptionType, msg) \
  do {                                       \
    if (!(cond)) throw ExceptionType(msg);   \
  } while (false)

inline int popcount(std::uint64_t x) noexcept { return std::popcount(x); }

inline std::uint64_t low_mask(int n) noexcept {
  return n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
}

/// +1 for a clear bit (spin up), -1 for a set bit (spin down).
inline int spin_of(std::uint64_t bits, int i) noexcept {
  return ((bits >> i) & 1U) ? -1 : 1;
}

/// True when a log-amplitude encodes an exact zero of the wave function.
inline bool is_zero_log(cplx log_value) noexcept {
  return log_value.real() == kNegInf;
}

/// psi(num) / psi(den) from log-amplitudes; an exact-zero numerator yields 0.
inline cplx amplitude_ratio(cplx log_num, cplx log_den) {
  if (is_zero_log(log_num)) return {0.0, 0.0};
  NTFS_CHECK(!is_zero_log(log_den), DomainError,
             "amplitude ratio with zero denominator: sample outside support");
  return std::exp(log_num - log_den);
}

}  // namespace ntfs
