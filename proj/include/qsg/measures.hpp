#pragma once

// Distances between one-dimensional probability measures, reference laws,
// bounded-Lipschitz test functions and Fejer smoothing.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qsg/core.hpp"
#include "qsg/rng.hpp"
#include "qsg/spectra.hpp"

namespace qsg {

/// Standard Gaussian or semicircle of the given radius (density
/// (2 / (pi r^2)) sqrt(r^2 - x^2) on [-r, r]).
class ReferenceLaw {
 public:
  enum class Kind { gaussian, semicircle };

  static ReferenceLaw gaussian() { return ReferenceLaw(Kind::gaussian, 0.0); }
  static ReferenceLaw semicircle(double radius = 2.0);

  Kind kind() const noexcept { return kind_; }
  double radius() const noexcept { return radius_; }
  std::string name() const;

  double pdf(double x) const;
  double cdf(double x) const;
  /// int_{-inf}^x F(s) ds.
  double cdf_antiderivative(double x) const;
  /// int_x^inf (1 - F(s)) ds; equals cdf_antiderivative(-x) by symmetry.
  double upper_antiderivative(double x) const { return cdf_antiderivative(-x); }
  /// Smallest x with F(x) >= p, by bisection.
  double quantile(double p, double tol = 1e-13) const;

  /// Interval carrying all but a negligible mass: [-8, 8] or [-r, r].
  double support_lo() const noexcept { return kind_ == Kind::gaussian ? -8.0 : -radius_; }
  double support_hi() const noexcept { return kind_ == Kind::gaussian ? 8.0 : radius_; }

 private:
  ReferenceLaw(Kind kind, double radius) : kind_(kind), radius_(radius) {}

  Kind kind_;
  double radius_;
};

/// Finite probability measure on R with sorted, distinct atoms.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  /// `points` must be nondecreasing and finite; equal points are merged.
  /// Weights must be nonnegative and sum to 1 within 1e-9.
  DiscreteMeasure(std::vector<double> points, std::vector<double> weights);

  /// Uniform weights on arbitrary (unsorted) samples.
  static DiscreteMeasure from_samples(std::vector<double> samples);
  static DiscreteMeasure dirac(double x) { return DiscreteMeasure({x}, {1.0}); }
  static DiscreteMeasure from_spectrum(const SpectralMeasure& measure);

  const std::vector<double>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return points_.size(); }

  /// int f d(mu) for a callable f.
  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) sum += weights_[i] * f(points_[i]);
    return sum;
  }

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
};

/// Function linear between breakpoints and constant outside them.
class PiecewiseLinearFn {
 public:
  PiecewiseLinearFn() : breakpoints_{0.0}, values_{0.0} {}
  /// Breakpoints strictly increasing; same length as values; at least one.
  PiecewiseLinearFn(std::vector<double> breakpoints, std::vector<double> values);

  static PiecewiseLinearFn zero() { return {}; }

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double operator()(double x) const;

  double sup_norm() const;
  double lipschitz() const;
  /// ||f||_inf + Lip(f), exact from the representation.
  double bl_norm() const { return sup_norm() + lipschitz(); }

  /// f(0) = 0, ||f||_BL <= 1, zero outside [-2R, 2R], linear on the uniform
  /// m-piece grid over [-2R, 2R].
  bool in_g_class(double R, std::size_t m, double tol = 1e-12) const;

  friend bool operator==(const PiecewiseLinearFn&, const PiecewiseLinearFn&) = default;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

/// Random member of the class G(R, m); m must be even (m = 1 gives the zero function).
PiecewiseLinearFn random_g_class_member(double R, std::size_t m, CounterRng& rng);

/// W1(mu, law) = int |F_mu - F|, evaluated piecewise in closed form.
double w1_to_law(const DiscreteMeasure& measure, const ReferenceLaw& law, double crossing_tol = 1e-12);
double w1_to_law(const SpectralMeasure& measure, const ReferenceLaw& law);

/// W1 between two discrete measures.
double w1_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct DblOptions {
  /// Solve the joint LP with a dense simplex instead of the envelope search.
  bool dense_lp = false;
  /// Golden-section tolerance on the Lipschitz share of the budget.
  double tol = 1e-10;
};

/// Bounded-Lipschitz distance sup { int f d(mu - nu) : ||f||_inf + Lip(f) <= 1 }.
double dbl_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const DblOptions& options = {});

/// Value of max sum_i w_i f_i over |f_i| <= sup_bound, |f_{i+1} - f_i| <= lip * (x_{i+1} - x_i).
double dbl_inner(std::span<const double> points, std::span<const double> signed_weights, double sup_bound,
                 double lip);

/// As above with a separate bound per point; a zero bound pins f_i = 0.
double dbl_inner(std::span<const double> points, std::span<const double> signed_weights,
                 std::span<const double> bounds, double lip);

/// Golden-section maximum over L in [0, 1] of a concave value_at(L).
double maximize_budget_split(const std::function<double(double)>& value_at, double tol = 1e-10);

struct GridSpec {
  double step = 2e-3;
};

/// Cell discretization of `law` with atoms at cell midpoints; tails folded into the end cells.
DiscreteMeasure discretize(const ReferenceLaw& law, const GridSpec& grid = {});

struct DistanceWithSlack {
  double value = 0.0;
  double slack = 0.0;
};

/// d_BL(measure, law) through `discretize`; slack = step/2 + 2 * folded tail mass.
DistanceWithSlack dbl_to_law(const DiscreteMeasure& measure, const ReferenceLaw& law, const GridSpec& grid = {});
DistanceWithSlack dbl_to_law(const SpectralMeasure& measure, const ReferenceLaw& law, const GridSpec& grid = {});

/// Truncation f_R: f on [-R, R], slope-one decay to zero outside.
/// Requires f(0) = 0, Lip(f) <= 1 and sup|f| <= 1. Lip(f_R) <= 1 and sup|f_R| <= sup|f|,
/// so ||f_R||_BL <= 1 + sup|f|, and truncation is idempotent.
PiecewiseLinearFn truncate_bl(const PiecewiseLinearFn& f, double R);

/// K_lambda(x) = (lambda / 2 pi) (sin(lambda x / 2) / (lambda x / 2))^2.
double fejer_kernel(double lambda, double x);

/// (f * K_lambda)(x) at each point, in closed form through Si and Cin.
std::vector<double> fejer_convolve(const PiecewiseLinearFn& f, double lambda, std::span<const double> points);

/// Same convolution by Gauss-Legendre quadrature on kernel lobes; f must vanish outside its breakpoints.
std::vector<double> fejer_convolve_quadrature(const PiecewiseLinearFn& f, double lambda,
                                              std::span<const double> points);

/// (8 log(lambda) + 8 log(2R) + 6) / (pi lambda).
double fejer_sup_bound(double lambda, double R);

/// Mass of {|x| > t}.
double tail_mass(const DiscreteMeasure& measure, double t);
double tail_mass(const SpectralMeasure& measure, double t);

struct TailCheck {
  double t = 0.0;
  double mean = 0.0;
  double standard_error = 0.0;
  /// t^2 * mean: the constant c that the bound c / t^2 needs at this t.
  double c_estimate = 0.0;
};

/// Replica-averaged tail masses at each t.
std::vector<TailCheck> tail_bound_check(std::span<const SpectralMeasure> replicas, std::span<const double> ts);

}  // namespace qsg
