#include "qsg/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "qsg/rng.hpp"
#include "qsg/tridiagonal.hpp"

namespace qsg {
SpectralMeasure::SpectralMeasure(RealVector eigenvalues, std::size_t n_sites)
    : eigenvalues_(std::move(eigenvalues)), n_sites_(n_sites) {
  if (eigenvalues_.size() == 0) throw ArgumentError("spectral measure needs at least one atom");
  for (double v : eigenvalues_) {
    if (!std::isfinite(v)) throw ArgumentError("non-finite eigenvalue");
  }
  std::sort(eigenvalues_.begin(), eigenvalues_.end());
}

double SpectralMeasure::moment(int k) const {
  if (k < 0) throw ArgumentError("moment order must be nonnegative");
  double sum = 0.0;
  for (double v : eigenvalues_) sum += std::pow(v, k);
  return sum / static_cast<double>(eigenvalues_.size());
}

double SpectralMeasure::max_abs() const { return eigenvalues_.cwiseAbs().maxCoeff(); }

HermitianEigensolver& HermitianEigensolver::compute(ComplexMatrix matrix) {
  if (matrix.rows() != matrix.cols()) throw DimensionError("eigensolver needs a square matrix");
  const double scale = matrix.norm();
  if ((matrix - matrix.adjoint()).norm() > 1e-12 * std::max(scale, 1e-300)) {
    throw ContractError("matrix is not Hermitian");
  }
  reduced_ = std::move(matrix);
  tridiagonal::householder_reduce(reduced_, diag_, offdiag_, tau_);
  eigenvalues_ = tridiagonal::ql_eigenvalues<double>(diag_, offdiag_);
  return *this;
}

ComplexVector HermitianEigensolver::eigenvector(Eigen::Index index) const {
  if (index < 0 || index >= eigenvalues_.size()) throw ArgumentError("eigenvalue index out of range");
  const RealVector z = tridiagonal::inverse_iteration<double>(diag_, offdiag_, eigenvalues_[index]);
  ComplexVector v = z.cast<Complex>();
  tridiagonal::apply_reflectors(reduced_, tau_, v);
  return v / v.norm();
}

RealVector eigenvalues_hermitian(const ComplexMatrix& matrix) {
  return HermitianEigensolver(matrix).eigenvalues();
}

SpectralMeasure eig_dense(const HamiltonianOperator& h) {
  if (h.n_sites() > kMaxDenseSites) throw SizeError("dense eigensolve limited to 14 sites");
  return SpectralMeasure(eigenvalues_hermitian(dense(h)), h.n_sites());
}

LanczosResult lanczos_extremal(const HamiltonianOperator& h, std::size_t max_iters, double tol,
                               std::uint64_t seed) {
  if (max_iters < 2) throw ArgumentError("Lanczos needs at least 2 iterations");
  const auto dim = static_cast<Eigen::Index>(h.dimension());
  const Eigen::Index steps = std::min<Eigen::Index>(static_cast<Eigen::Index>(max_iters), dim);

  CounterRng rng(seed);
  ComplexVector q(dim);
  for (auto& c : q) c = Complex(rng.normal(), rng.normal());
  q /= q.norm();

  ComplexMatrix basis(dim, steps);
  RealVector alpha(steps);
  RealVector beta(steps);
  LanczosResult result;
  double previous = 0.0;
  ComplexVector w(dim);

  for (Eigen::Index j = 0; j < steps; ++j) {
    basis.col(j) = q;
    w.setZero();
    h.apply_add(q, w);
    alpha[j] = std::real(q.dot(w));
    auto done = basis.leftCols(j + 1);
    for (int pass = 0; pass < 2; ++pass) w.noalias() -= done * (done.adjoint() * w);
    beta[j] = w.norm();

    const RealVector a = alpha.head(j + 1);
    const RealVector b = beta.head(j);
    const RealVector ritz = tridiagonal::ql_eigenvalues<double>(a, b);
    const double lo = ritz[0];
    const double hi = ritz[ritz.size() - 1];
    const double theta = std::abs(hi) >= std::abs(lo) ? hi : lo;
    result.value = std::abs(theta);
    result.iterations = static_cast<std::size_t>(j + 1);

    const double scale = std::max({std::abs(theta), std::abs(alpha[j]), beta[j], 1e-300});
    if (beta[j] <= 1e-13 * scale || j + 1 == dim) {
      result.converged = true;
      return result;
    }
    if (j > 0 && std::abs(result.value - previous) < tol) {
      const RealVector s = tridiagonal::inverse_iteration<double>(a, b, theta);
      const double residual = beta[j] * std::abs(s[s.size() - 1]);
      if (residual <= std::sqrt(tol) * std::max(1.0, std::abs(theta))) {
        result.converged = true;
        return result;
      }
    }
    previous = result.value;
    q = w / beta[j];
  }
  return result;
}

ExactRational moment_exact(const CouplingGeometry& geometry, int k, Law law) {
  if (law != Law::gaussian_iid) throw ArgumentError("exact moments are defined for Gaussian coefficients only");
  if (k < 1 || k > 4) throw ArgumentError("exact moments support k in {1,2,3,4}");
  validate(geometry);

  // For every geometry the squared normalization is 1 / (number of terms).
  const auto denominator = static_cast<std::int64_t>(coefficient_dimension(geometry));
  if (k % 2 == 1) return {0, 1};

  const auto strings = term_strings(geometry);
  auto unit_trace = [](const PauliString& p) {
    const UnitTrace t = normalized_trace(p);
    if (t.im != 0) throw ContractError("moment enumeration met a non-real trace");
    return static_cast<std::int64_t>(t.re);
  };

  std::int64_t sum = 0;
  std::int64_t den = denominator;
  if (k == 2) {
    for (const auto& p : strings) sum += unit_trace(p * p);
  } else {
    den = denominator * denominator;
    for (const auto& p : strings) {
      for (const auto& q : strings) {
        const PauliString pq = p * q;
        sum += unit_trace(p * p * q * q);
        sum += unit_trace(pq * pq);
        sum += unit_trace(pq * q * p);
      }
    }
  }
  const std::int64_t g = std::gcd(sum < 0 ? -sum : sum, den);
  return {sum / g, den / g};
}

Complex cf_empirical(const SpectralMeasure& measure, double t) {
  double re = 0.0;
  double im = 0.0;
  for (double v : measure.eigenvalues()) {
    re += std::cos(t * v);
    im += std::sin(t * v);
  }
  const double w = measure.weight();
  return {re * w, im * w};
}

StochasticMoments stochastic_moments(const HamiltonianOperator& h, int k_max, std::size_t n_probes,
                                     std::uint64_t seed) {
  if (k_max < 1) throw ArgumentError("k_max must be at least 1");
  if (n_probes < 1) throw ArgumentError("at least one probe is required");
  const auto dim = static_cast<Eigen::Index>(h.dimension());
  const auto kk = static_cast<std::size_t>(k_max);
  std::vector<std::vector<double>> samples(kk, std::vector<double>(n_probes));

  ComplexVector z(dim);
  ComplexVector w(dim);
  ComplexVector next(dim);
  for (std::size_t probe = 0; probe < n_probes; ++probe) {
    CounterRng rng(derive_seed(seed, probe));
    for (auto& c : z) c = Complex(rng.rademacher(), 0.0);
    w = z;
    for (std::size_t k = 0; k < kk; ++k) {
      next.setZero();
      h.apply_add(w, next);
      w.swap(next);
      samples[k][probe] = std::real(z.dot(w)) / static_cast<double>(dim);
    }
  }

  StochasticMoments out;
  const auto np = static_cast<double>(n_probes);
  for (const auto& s : samples) {
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / np;
    double ss = 0.0;
    for (double v : s) ss += (v - mean) * (v - mean);
    out.mean.push_back(mean);
    out.standard_error.push_back(n_probes > 1 ? std::sqrt(ss / (np - 1.0) / np) : 0.0);
  }
  return out;
}

void write_spectra_csv(std::ostream& os, std::span<const SpectralMeasure> spectra) {
  os << "replica,index,eigenvalue\n";
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::setprecision(17);
  for (std::size_t r = 0; r < spectra.size(); ++r) {
    const RealVector& ev = spectra[r].eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) os << r << ',' << i << ',' << ev[i] << '\n';
  }
  os.flags(flags);
  os.precision(precision);
}

}  // namespace qsg
