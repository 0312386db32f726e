#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qsg/ensembles.hpp"
#include "qsg/rng.hpp"

namespace {

using namespace qsg;

struct Moments {
  double mean = 0.0;
  double standard_error = 0.0;
};

template <class F>
Moments sphere_mc(std::size_t dim, std::size_t draws, std::uint64_t seed, F&& statistic) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t r = 0; r < draws; ++r) {
    const RealVector x = sample_sphere(dim, derive_seed(seed, r)).values;
    const double v = statistic(x);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / static_cast<double>(draws);
  const double var = (sum_sq - static_cast<double>(draws) * mean * mean) / static_cast<double>(draws - 1);
  return {mean, std::sqrt(var / static_cast<double>(draws))};
}

// Direct finite sum with log-gamma ratios in extended precision.
double series_oracle(std::size_t n, double t) {
  const long double half_n = 0.5L * static_cast<long double>(n);
  long double total = 0.0L;
  for (std::size_t k = 0; k <= n; ++k) {
    const long double kk = static_cast<long double>(k);
    const long double log_binom = std::lgamma(static_cast<long double>(n) + 1) - std::lgamma(kk + 1) -
                                  std::lgamma(static_cast<long double>(n - k) + 1);
    const long double log_ratio = std::lgamma(half_n) - std::lgamma(half_n + kk) - kk * std::log(2.0L);
    const long double log_power = kk * std::log(0.5L * t * t);
    const long double term = std::exp(log_binom + log_ratio + log_power);
    total += (k % 2 == 0) ? term : -term;
  }
  return static_cast<double>(total);
}

}  // namespace

TEST(SampleGaussian, ShapeAndErrors) {
  const CoefficientSample x = sample_gaussian(36, 1);
  EXPECT_EQ(x.dimension(), 36u);
  EXPECT_EQ(x.law, Law::gaussian_iid);
  EXPECT_EQ(x.seed, 1u);
  EXPECT_THROW(sample_gaussian(0, 1), ArgumentError);
}

TEST(SampleGaussian, MeanAndVarianceOverMillionDraws) {
  const RealVector x = sample_gaussian(1000000, 2).values;
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
  EXPECT_LT(std::abs(mean), 0.004);
  EXPECT_LT(std::abs(var - 1.0), 0.005);
}

TEST(Samplers, BitReproducible) {
  EXPECT_EQ(sample_gaussian(50, 9).values, sample_gaussian(50, 9).values);
  EXPECT_EQ(sample_sphere(50, 9).values, sample_sphere(50, 9).values);
  EXPECT_EQ(sample_custom(CustomLawSpec::uniform(), 50, 9).values,
            sample_custom(CustomLawSpec::uniform(), 50, 9).values);
  EXPECT_NE(sample_gaussian(50, 9).values, sample_gaussian(50, 10).values);
}

TEST(SampleSphere, UnitNorm) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ASSERT_NEAR(sample_sphere(90, seed).values.norm(), 1.0, 1e-12);
  }
  EXPECT_THROW(sample_sphere(1, 0), ArgumentError);
}

TEST(SampleSphere, SecondAndFourthCoordinateMoments) {
  const auto second = sphere_mc(90, 100000, 21, [](const RealVector& x) { return x[0] * x[0]; });
  EXPECT_LT(std::abs(second.mean - 1.0 / 90.0), 3.0 * second.standard_error);
  const auto fourth = sphere_mc(90, 100000, 22, [](const RealVector& x) { return std::pow(x[0], 4); });
  EXPECT_LT(std::abs(fourth.mean - 3.0 / (90.0 * 92.0)), 3.0 * fourth.standard_error);
}

TEST(SphereMoment, ClosedForms) {
  for (std::size_t n : {2u, 9u, 90u, 900u, 9000u}) {
    const double nd = static_cast<double>(n);
    const int two[] = {2};
    const int four[] = {4};
    const int two_two[] = {2, 2};
    EXPECT_NEAR(sphere_moment(n, two), 1.0 / nd, 1e-14 / nd);
    EXPECT_NEAR(sphere_moment(n, four), 3.0 / (nd * (nd + 2.0)), 1e-12 * 3.0 / (nd * (nd + 2.0)));
    EXPECT_NEAR(sphere_moment(n, two_two), 1.0 / (nd * (nd + 2.0)), 1e-12 / (nd * (nd + 2.0)));
  }
}

TEST(SphereMoment, OddExponentsVanishAndErrors) {
  const int odd[] = {2, 3};
  EXPECT_EQ(sphere_moment(10, odd), 0.0);
  const int negative[] = {-2};
  EXPECT_THROW(sphere_moment(10, negative), ArgumentError);
  const int too_many[] = {2, 2, 2};
  EXPECT_THROW(sphere_moment(2, too_many), DimensionError);
}

TEST(SphereMoment, SecondMomentsSumToOne) {
  const std::size_t n = 900;
  const int two[] = {2};
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += sphere_moment(n, two);
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(SphereMoment, AgreesWithMonteCarlo) {
  const int pattern[] = {2, 2};
  const auto mc = sphere_mc(90, 100000, 23, [](const RealVector& x) { return x[0] * x[0] * x[1] * x[1]; });
  EXPECT_LT(std::abs(mc.mean - sphere_moment(90, pattern)), 3.0 * mc.standard_error);
}

TEST(CosineSeries, Examples) {
  for (double t : {0.0, 0.3, 1.0, 2.5}) EXPECT_NEAR(cosine_surrogate_series(1, t), 1.0 - 0.5 * t * t, 1e-15);
  for (std::size_t n : {1u, 10u, 1000u}) EXPECT_EQ(cosine_surrogate_series(n, 0.0), 1.0);
  EXPECT_NEAR(cosine_surrogate_series(9000, 1.0), std::exp(-0.5), 1e-3);
}

TEST(CosineSeries, MatchesDirectSum) {
  for (std::size_t n : {2u, 5u, 20u, 60u}) {
    for (double t : {0.5, 1.0, 2.0}) {
      EXPECT_NEAR(cosine_surrogate_series(n, t), series_oracle(n, t), 1e-12) << "N=" << n << " t=" << t;
    }
  }
}

TEST(CosineSeries, ConvergesMonotonicallyToHalfGaussianExponent) {
  for (double t : {0.5, 1.0, 2.0}) {
    double previous = INFINITY;
    for (std::size_t n : {100u, 1000u, 10000u}) {
      const double value = cosine_surrogate_series(n, t);
      ASSERT_LE(value, 1.0);
      const double error = std::abs(value - std::exp(-0.5 * t * t));
      ASSERT_LT(error, previous) << "t=" << t << " N=" << n;
      previous = error;
    }
    // The limit is exp(-t^2/2), not exp(-t^2).
    EXPECT_GT(std::abs(cosine_surrogate_series(10000, t) - std::exp(-t * t)), 100.0 * previous);
  }
}

TEST(CosineProductMc, ZeroAngleIsExact) {
  const MonteCarloEstimate e = cosine_product_mc(50, 0.0, 10, 1);
  EXPECT_EQ(e.mean, 1.0);
  EXPECT_EQ(e.standard_error, 0.0);
  EXPECT_THROW(cosine_product_mc(50, 1.0, 1, 1), ArgumentError);
}

TEST(CosineProductMc, ConsistentWithSeries) {
  const MonteCarloEstimate e = cosine_product_mc(900, 1.0, 10000, 31);
  EXPECT_LT(std::abs(e.mean - cosine_surrogate_series(900, 1.0)), 3.0 * e.standard_error + 1.0 / 900.0);
  const MonteCarloEstimate far = cosine_product_mc(9000, 2.0, 10000, 32);
  EXPECT_LT(std::abs(far.mean - std::exp(-2.0)), 3.0 * far.standard_error + 16.0 / 9000.0);
}

TEST(SampleCustom, Rademacher) {
  const RealVector x = sample_custom(CustomLawSpec::rademacher(), 18, 4).values;
  EXPECT_EQ(x.size(), 18);
  for (double v : x) EXPECT_TRUE(v == 1.0 || v == -1.0);
}

TEST(SampleCustom, UniformHasUnitVariance) {
  const RealVector x = sample_custom(CustomLawSpec::uniform(), 200000, 5).values;
  EXPECT_LE(x.cwiseAbs().maxCoeff(), std::sqrt(3.0));
  const double var = x.squaredNorm() / static_cast<double>(x.size());
  // Var of U^2 with U uniform on [-sqrt3, sqrt3] is 9/5 - 1 = 4/5.
  EXPECT_LT(std::abs(var - 1.0), 3.0 * std::sqrt(0.8 / static_cast<double>(x.size())));
}

TEST(SampleCustom, UserTableMatchesRademacher) {
  const CustomLawSpec table = CustomLawSpec::user_table({{-1.0, 0.5}, {1.0, 0.5}});
  EXPECT_EQ(sample_custom(table, 10000, 6).values, sample_custom(CustomLawSpec::rademacher(), 10000, 6).values);
}

TEST(SampleCustom, UserTableIsRescaledToUnitVariance) {
  const CustomLawSpec table = CustomLawSpec::user_table({{-2.0, 0.25}, {0.0, 0.5}, {2.0, 0.25}});
  EXPECT_DOUBLE_EQ(table.variance(), 2.0);
  const RealVector x = sample_custom(table, 1000, 7).values;
  for (double v : x) EXPECT_TRUE(v == 0.0 || std::abs(std::abs(v) - std::sqrt(2.0)) < 1e-15);
}

TEST(SampleCustom, Errors) {
  EXPECT_THROW(CustomLawSpec::from_name("cauchy"), ArgumentError);
  EXPECT_THROW(CustomLawSpec::user_table({{1.0, 0.5}, {2.0, 0.5}}), ArgumentError);
  EXPECT_THROW(CustomLawSpec::user_table({{0.0, 1.0}}), ArgumentError);
  EXPECT_THROW(parse_law("cauchy"), ArgumentError);
}

TEST(Samplers, LawDispatchAndNames) {
  for (Law law : {Law::gaussian_iid, Law::sphere, Law::custom}) {
    EXPECT_EQ(parse_law(to_string(law)), law);
    EXPECT_EQ(sample_law(law, 20, 3).law, law);
  }
}

TEST(SphereConcentration, TailExponentStableAcrossDimension) {
  // Thresholds at fixed N t^2 make the exponent c of P[|x_1| > t] ~ C exp(-c N t^2) comparable.
  const std::vector<double> scaled = {1.0, 2.0, 4.0, 6.0};
  std::vector<double> exponents;
  for (std::size_t n : {90u, 900u}) {
    std::vector<std::size_t> hits(scaled.size(), 0);
    constexpr std::size_t kDraws = 100000;
    for (std::size_t r = 0; r < kDraws; ++r) {
      const double x1 = std::abs(sample_sphere(n, derive_seed(77 + n, r)).values[0]);
      for (std::size_t i = 0; i < scaled.size(); ++i) hits[i] += x1 > std::sqrt(scaled[i] / static_cast<double>(n));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      ASSERT_GT(hits[i], 0u);
      const double y = std::log(static_cast<double>(hits[i]) / kDraws);
      sx += scaled[i];
      sy += y;
      sxx += scaled[i] * scaled[i];
      sxy += scaled[i] * y;
    }
    const double k = static_cast<double>(scaled.size());
    exponents.push_back(-(k * sxy - sx * sy) / (k * sxx - sx * sx));
  }
  EXPECT_GT(exponents[0], 0.0);
  EXPECT_GT(exponents[1], 0.0);
  EXPECT_LT(std::max(exponents[0], exponents[1]) / std::min(exponents[0], exponents[1]), 2.0);
}
