#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

namespace qsg {

using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr const char* kVersion = "0.3.1";

/// Largest site count for which a dense 2^n x 2^n matrix may be formed.
inline constexpr std::size_t kMaxDenseSites = 14;

/// Largest site count for which state vectors are allocated at all.
inline constexpr std::size_t kMaxStateSites = 26;

/// Operand shapes disagree (vector length, site count, coefficient count).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter is outside the accepted domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition on a value (not its shape) does not hold.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Requested object would exceed the dense-materialization budget.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline std::size_t hilbert_dimension(std::size_t n_sites) {
  if (n_sites > kMaxStateSites) throw SizeError("state vectors limited to 26 sites");
  return std::size_t{1} << n_sites;
}

}  // namespace qsg
