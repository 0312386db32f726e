#pragma once

// Coefficient samplers and exact spherical moment formulas.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qsg/core.hpp"

namespace qsg {

enum class Law { gaussian_iid, sphere, custom };

std::string_view to_string(Law law);
Law parse_law(std::string_view name);

struct CoefficientSample {
  RealVector values;
  Law law = Law::gaussian_iid;
  std::uint64_t seed = 0;

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(values.size()); }
};

/// A symmetric i.i.d. coefficient law. Draws are rescaled to unit variance.
class CustomLawSpec {
 public:
  enum class Kind { rademacher, uniform, user_table };

  static CustomLawSpec rademacher();
  static CustomLawSpec uniform();
  /// Atoms (value, probability); must be symmetric about 0 with positive variance.
  static CustomLawSpec user_table(std::vector<std::pair<double, double>> atoms);
  static CustomLawSpec from_name(std::string_view name);

  Kind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept;
  /// Variance of the law before rescaling.
  double variance() const noexcept { return variance_; }
  /// E|X|^3 after rescaling to unit variance.
  std::optional<double> third_absolute_moment() const noexcept { return third_abs_; }
  const std::vector<std::pair<double, double>>& atoms() const noexcept { return atoms_; }

 private:
  CustomLawSpec() = default;

  Kind kind_ = Kind::rademacher;
  double variance_ = 1.0;
  std::optional<double> third_abs_;
  std::vector<std::pair<double, double>> atoms_;
  std::vector<double> cumulative_;

  friend CoefficientSample sample_custom(const CustomLawSpec&, std::size_t, std::uint64_t);
};

CoefficientSample sample_gaussian(std::size_t dim, std::uint64_t seed);

/// Uniform point on the unit sphere in R^dim.
CoefficientSample sample_sphere(std::size_t dim, std::uint64_t seed);

CoefficientSample sample_custom(const CustomLawSpec& spec, std::size_t dim, std::uint64_t seed);

/// Dispatch on `law`; `custom` defaults to Rademacher when no spec is given.
CoefficientSample sample_law(Law law, std::size_t dim, std::uint64_t seed,
                             const CustomLawSpec* custom = nullptr);

/// E[prod_i |x_i|^{alpha_i}] for x uniform on the unit sphere in R^dim.
/// Odd exponents give 0.
double sphere_moment(std::size_t dim, std::span<const int> alphas);

/// E[prod_{k<=N} (1 - (t x_k)^2 / 2)] for x uniform on S^{N-1}, as a finite series.
double cosine_surrogate_series(std::size_t n, double t);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo estimate of E[prod_k cos(t x_k)] over sphere draws.
MonteCarloEstimate cosine_product_mc(std::size_t n, double t, std::size_t replicas,
                                     std::uint64_t seed);

}  // namespace qsg
