#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qsg/core.hpp"
#include "qsg/hamiltonian.hpp"

namespace qsg {

/// Uniform probability measure on the sorted eigenvalues of one operator.
class SpectralMeasure {
 public:
  SpectralMeasure() = default;
  /// Sorts `eigenvalues`; the weight of each atom is 1/size.
  SpectralMeasure(RealVector eigenvalues, std::size_t n_sites);

  const RealVector& eigenvalues() const noexcept { return eigenvalues_; }
  std::size_t n_sites() const noexcept { return n_sites_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }
  double weight() const noexcept { return 1.0 / static_cast<double>(eigenvalues_.size()); }

  /// (1/size) sum_j lambda_j^k.
  double moment(int k) const;
  double max_abs() const;

 private:
  RealVector eigenvalues_;
  std::size_t n_sites_ = 0;
};

/// Dense Hermitian eigensolver; keeps the reduction for spot eigenvectors.
class HermitianEigensolver {
 public:
  HermitianEigensolver() = default;
  explicit HermitianEigensolver(ComplexMatrix matrix) { compute(std::move(matrix)); }

  /// Throws ContractError when `matrix` is not Hermitian to 1e-12 relative.
  HermitianEigensolver& compute(ComplexMatrix matrix);

  const RealVector& eigenvalues() const noexcept { return eigenvalues_; }

  /// Unit eigenvector for eigenvalues()[index].
  ComplexVector eigenvector(Eigen::Index index) const;

 private:
  ComplexMatrix reduced_;
  ComplexVector tau_;
  RealVector diag_;
  RealVector offdiag_;
  RealVector eigenvalues_;
};

/// All 2^n eigenvalues of H; n <= kMaxDenseSites.
SpectralMeasure eig_dense(const HamiltonianOperator& h);

/// Eigenvalues of a dense Hermitian matrix, ascending.
RealVector eigenvalues_hermitian(const ComplexMatrix& matrix);

struct LanczosResult {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Largest |eigenvalue| via Lanczos with full reorthogonalization.
/// Converged once successive Ritz extremes differ by less than `tol` and the
/// residual estimate of the extreme Ritz pair is below sqrt(tol) * max(1, |theta|).
LanczosResult lanczos_extremal(const HamiltonianOperator& h, std::size_t max_iters = 300,
                               double tol = 1e-12, std::uint64_t seed = 0);

/// Exact rational value num/den.
struct ExactRational {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  double value() const noexcept { return static_cast<double>(numerator) / static_cast<double>(denominator); }
  friend bool operator==(const ExactRational&, const ExactRational&) = default;
};

/// 2^{-n} E tr H^k for Gaussian coefficients, by Wick pairing; k in {1,2,3,4}.
ExactRational moment_exact(const CouplingGeometry& geometry, int k, Law law = Law::gaussian_iid);

/// (1/size) sum_j exp(i t lambda_j).
Complex cf_empirical(const SpectralMeasure& measure, double t);

struct StochasticMoments {
  std::vector<double> mean;            // index k-1 holds the k-th moment
  std::vector<double> standard_error;
};

/// Hutchinson estimates of 2^{-n} tr H^k, k = 1..k_max, with Rademacher probes.
StochasticMoments stochastic_moments(const HamiltonianOperator& h, int k_max, std::size_t n_probes,
                                     std::uint64_t seed);

/// Writes `replica,index,eigenvalue` rows with 17 significant digits.
void write_spectra_csv(std::ostream& os, std::span<const SpectralMeasure> spectra);

}  // namespace qsg
