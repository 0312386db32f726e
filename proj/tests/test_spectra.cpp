#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qsg/spectra.hpp"
#include "test_support.hpp"

namespace {

using namespace qsg;

HamiltonianOperator random_chain(std::size_t n, std::uint64_t seed) { return build_chain(n, sample_gaussian(9 * n, seed)); }

HamiltonianOperator one_edge_xx() {
  CoefficientSample x{RealVector::Zero(9), Law::gaussian_iid, 0};
  x.values[0] = 1.0;
  return build_graph(GraphGeometry{2, {{1, 2}}}, x);
}

ComplexMatrix random_hermitian(Eigen::Index dim, CounterRng& rng) {
  ComplexMatrix a(dim, dim);
  for (auto& z : a.reshaped()) z = Complex(rng.normal(), rng.normal());
  return 0.5 * (a + a.adjoint());
}

// Fourth moment for Gaussian coefficients from pairwise commutation signs:
// each ordered pair contributes 2 + s (s = +1 if the strings commute, -1 otherwise),
// each diagonal pair contributes 3.
double fourth_moment_oracle(const CouplingGeometry& g) {
  const auto strings = term_strings(g);
  const double d = static_cast<double>(strings.size());
  double total = 3.0 * d;
  for (std::size_t a = 0; a < strings.size(); ++a) {
    const ComplexMatrix pa = dense(strings[a]);
    for (std::size_t b = 0; b < strings.size(); ++b) {
      if (a == b) continue;
      const ComplexMatrix pb = dense(strings[b]);
      const bool commute = (pa * pb - pb * pa).norm() == 0.0;
      total += commute ? 3.0 : 1.0;
    }
  }
  return total / (d * d);
}

}  // namespace

TEST(EigDense, PauliZ) {
  const RealVector eig = eigenvalues_hermitian(dense(PauliString::single(1, 1, 3)));
  EXPECT_NEAR(eig[0], -1.0, 1e-15);
  EXPECT_NEAR(eig[1], 1.0, 1e-15);
}

TEST(EigDense, ScaledXX) {
  const SpectralMeasure mu = eig_dense(one_edge_xx());
  ASSERT_EQ(mu.size(), 4u);
  EXPECT_NEAR(mu.eigenvalues()[0], -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(mu.eigenvalues()[1], -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(mu.eigenvalues()[2], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(mu.eigenvalues()[3], 1.0 / 3.0, 1e-15);
}

TEST(EigDense, MatchesReferenceSolverOnRandomHermitian) {
  CounterRng rng(1);
  for (Eigen::Index dim : {1, 2, 3, 7, 16, 33, 100}) {
    const ComplexMatrix a = random_hermitian(dim, rng);
    const RealVector ours = eigenvalues_hermitian(a);
    const RealVector reference = test_support::reference_eigenvalues(a);
    EXPECT_LE((ours - reference).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, a.norm())) << dim;
  }
}

TEST(EigDense, DegenerateAndDiagonalInputs) {
  EXPECT_EQ(eigenvalues_hermitian(ComplexMatrix::Zero(5, 5)), RealVector::Zero(5));
  ComplexMatrix d = ComplexMatrix::Zero(4, 4);
  d.diagonal() << 3.0, -1.0, 3.0, 0.5;
  RealVector expected(4);
  expected << -1.0, 0.5, 3.0, 3.0;
  EXPECT_LE((eigenvalues_hermitian(d) - expected).cwiseAbs().maxCoeff(), 1e-15);
  const ComplexMatrix id = ComplexMatrix::Identity(6, 6) * 2.5;
  EXPECT_LE((eigenvalues_hermitian(id).array() - 2.5).abs().maxCoeff(), 1e-15);
}

TEST(EigDense, Errors) {
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(eigenvalues_hermitian(a), ContractError);
  EXPECT_THROW(eigenvalues_hermitian(ComplexMatrix::Zero(2, 3)), DimensionError);
  const CoefficientSample x{RealVector::Zero(135), Law::gaussian_iid, 0};
  EXPECT_THROW(eig_dense(build_chain(15, x)), SizeError);
}

TEST(EigDense, SumRulesAcrossGeometries) {
  const std::vector<CouplingGeometry> geometries = {ChainGeometry{4}, ChainGeometry{7}, ChainGeometry{10},
                                                    complete_graph(5), PSpinGeometry{6, 3}, PSpinGeometry{8, 8}};
  std::uint64_t seed = 2;
  for (const auto& g : geometries) {
    const auto h = build(g, sample_gaussian(coefficient_dimension(g), seed++));
    const SpectralMeasure mu = eig_dense(h);
    const RealVector& lambda = mu.eigenvalues();
    EXPECT_LE(std::abs(lambda.sum()), 1e-9 * std::max(1.0, lambda.norm())) << model_name(g);
    const double hs = hs_norm_squared(h);
    EXPECT_NEAR(lambda.squaredNorm(), hs, 1e-9 * hs) << model_name(g);
    EXPECT_TRUE(std::is_sorted(lambda.begin(), lambda.end()));
  }
}

TEST(EigDense, SpotEigenpairResiduals) {
  const auto h = random_chain(8, 3);
  const ComplexMatrix m = dense(h);
  HermitianEigensolver solver(m);
  const double op = solver.eigenvalues().cwiseAbs().maxCoeff();
  for (Eigen::Index index : {0, 1, 77, 128, 200, 255}) {
    const ComplexVector v = solver.eigenvector(index);
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    EXPECT_LE((m * v - solver.eigenvalues()[index] * v).norm(), 1e-8 * op) << index;
  }
  EXPECT_THROW(solver.eigenvector(256), ArgumentError);
}

TEST(EigDense, HoffmanWielandt) {
  for (std::uint64_t pair = 0; pair < 20; ++pair) {
    const auto h = random_chain(4, 100 + 2 * pair);
    const auto g = random_chain(4, 101 + 2 * pair);
    const double lhs = (eig_dense(h).eigenvalues() - eig_dense(g).eigenvalues()).squaredNorm();
    const double rhs = std::pow(hs_distance(h, g), 2);
    ASSERT_LE(lhs, rhs + 1e-9);
  }
}

TEST(EigDense, ThirdMomentSymmetricOnAverage) {
  constexpr int kReplicas = 500;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int r = 0; r < kReplicas; ++r) {
    const double m3 = eig_dense(random_chain(4, 5000 + r)).moment(3);
    sum += m3;
    sum_sq += m3 * m3;
  }
  const double mean = sum / kReplicas;
  const double se = std::sqrt((sum_sq / kReplicas - mean * mean) / (kReplicas - 1));
  EXPECT_LT(std::abs(mean), 3.0 * se);
}

TEST(SpectralMeasure, SortsAndValidates) {
  RealVector v(3);
  v << 2.0, -1.0, 0.5;
  const SpectralMeasure mu(v, 0);
  EXPECT_EQ(mu.eigenvalues()[0], -1.0);
  EXPECT_EQ(mu.eigenvalues()[2], 2.0);
  EXPECT_DOUBLE_EQ(mu.moment(2), (4.0 + 1.0 + 0.25) / 3.0);
  EXPECT_EQ(mu.max_abs(), 2.0);
  EXPECT_THROW(SpectralMeasure(RealVector(0), 0), ArgumentError);
  v[1] = NAN;
  EXPECT_THROW(SpectralMeasure(v, 0), ArgumentError);
}

TEST(Lanczos, Examples) {
  EXPECT_NEAR(lanczos_extremal(one_edge_xx()).value, 1.0 / 3.0, 1e-10);
  const CoefficientSample zero{RealVector::Zero(36), Law::gaussian_iid, 0};
  const LanczosResult r = lanczos_extremal(build_chain(4, zero));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_THROW(lanczos_extremal(one_edge_xx(), 1), ArgumentError);
}

TEST(Lanczos, MatchesDenseNorm) {
  for (std::size_t n : {4u, 6u, 8u, 10u}) {
    const auto h = random_chain(n, 40 + n);
    const double exact = eig_dense(h).max_abs();
    const LanczosResult r = lanczos_extremal(h, 300, 1e-12, 7);
    EXPECT_TRUE(r.converged) << n;
    EXPECT_NEAR(r.value, exact, 1e-8) << n;
    EXPECT_LE(r.value, exact + 1e-8);
  }
}

TEST(MomentExact, OddMomentsVanish) {
  EXPECT_EQ(moment_exact(ChainGeometry{5}, 1), (ExactRational{0, 1}));
  EXPECT_EQ(moment_exact(complete_graph(4), 3), (ExactRational{0, 1}));
}

TEST(MomentExact, SecondMomentIsOne) {
  for (std::size_t n = 2; n <= 8; ++n) EXPECT_EQ(moment_exact(ChainGeometry{n}, 2), (ExactRational{1, 1})) << n;
  EXPECT_EQ(moment_exact(complete_graph(5), 2), (ExactRational{1, 1}));
  EXPECT_EQ(moment_exact(GraphGeometry{4, {{1, 2}, {3, 4}}}, 2), (ExactRational{1, 1}));
  EXPECT_EQ(moment_exact(PSpinGeometry{5, 3}, 2), (ExactRational{1, 1}));
}

TEST(MomentExact, FourthMomentMatchesCommutationOracle) {
  for (const CouplingGeometry& g : std::vector<CouplingGeometry>{ChainGeometry{3}, ChainGeometry{4}, complete_graph(4),
                                                                 PSpinGeometry{4, 1}, PSpinGeometry{3, 3}}) {
    EXPECT_NEAR(moment_exact(g, 4).value(), fourth_moment_oracle(g), 1e-14) << model_name(g);
  }
  // Single-site fields commute across sites; only same-site pairs anticommute.
  const ExactRational fields = moment_exact(PSpinGeometry{4, 1}, 4);
  EXPECT_EQ(fields, (ExactRational{8, 3}));
}

TEST(MomentExact, Errors) {
  EXPECT_THROW(moment_exact(ChainGeometry{4}, 5), ArgumentError);
  EXPECT_THROW(moment_exact(ChainGeometry{4}, 0), ArgumentError);
  EXPECT_THROW(moment_exact(ChainGeometry{4}, 2, Law::sphere), ArgumentError);
}

TEST(CfEmpirical, Examples) {
  const SpectralMeasure mu = eig_dense(random_chain(5, 9));
  EXPECT_EQ(cf_empirical(mu, 0.0), Complex(1.0, 0.0));
  RealVector pm(2);
  pm << -1.0, 1.0;
  const SpectralMeasure two(pm, 1);
  for (double t : {0.3, 1.0, 2.7}) {
    const Complex psi = cf_empirical(two, t);
    EXPECT_NEAR(psi.real(), std::cos(t), 1e-15);
    EXPECT_NEAR(psi.imag(), 0.0, 1e-15);
  }
}

TEST(StochasticMoments, ZeroOperator) {
  const CoefficientSample zero{RealVector::Zero(36), Law::gaussian_iid, 0};
  const auto est = stochastic_moments(build_chain(4, zero), 4, 8, 1);
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(est.mean[k], 0.0);
    EXPECT_EQ(est.standard_error[k], 0.0);
  }
}

TEST(StochasticMoments, InvolutionSecondMomentExact) {
  const auto est = stochastic_moments(one_edge_xx(), 2, 16, 2);
  EXPECT_NEAR(est.mean[1], 1.0 / 9.0, 1e-16);
  EXPECT_NEAR(est.standard_error[1], 0.0, 1e-16);
}

TEST(StochasticMoments, MatchesDenseMoments) {
  const auto h = random_chain(8, 10);
  const SpectralMeasure mu = eig_dense(h);
  const auto est = stochastic_moments(h, 4, 64, 3);
  for (int k = 1; k <= 4; ++k) {
    EXPECT_LE(std::abs(est.mean[k - 1] - mu.moment(k)), 3.0 * est.standard_error[k - 1] + 1e-12) << k;
  }
  EXPECT_THROW(stochastic_moments(h, 0, 4, 1), ArgumentError);
  EXPECT_THROW(stochastic_moments(h, 2, 0, 1), ArgumentError);
}

TEST(SpectraCsv, HeaderAndPrecision) {
  RealVector v(2);
  v << 0.1, -1.0 / 3.0;
  const std::vector<SpectralMeasure> spectra = {SpectralMeasure(v, 1)};
  std::ostringstream os;
  write_spectra_csv(os, spectra);
  EXPECT_EQ(os.str(), "replica,index,eigenvalue\n0,0,-0.33333333333333331\n0,1,0.10000000000000001\n");
}
