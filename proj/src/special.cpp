#include "qsg/special.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qsg::special {
namespace {

constexpr double kSeriesLimit = 4.0;

struct CiSi {
  double ci;
  double si;
};

// Continued fraction for E1(iz), z > kSeriesLimit (modified Lentz).
CiSi cisi_continued_fraction(double z) {
  using C = std::complex<double>;
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  C b(1.0, z);
  C c(1.0 / tiny, 0.0);
  C d = 1.0 / b;
  C h = d;
  for (int i = 2; i < 100000; ++i) {
    const double a = -static_cast<double>((i - 1) * (i - 1));
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const C del = c * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps) break;
  }
  h *= C(std::cos(z), -std::sin(z));
  return {-h.real(), 0.5 * std::numbers::pi + h.imag()};
}

}  // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double sine_integral(double z) {
  const double az = std::abs(z);
  if (az == 0.0) return 0.0;
  double out;
  if (az <= kSeriesLimit) {
    const double z2 = az * az;
    double term = az;
    double sum = az;
    for (int k = 1; k < 60; ++k) {
      term *= -z2 / ((2.0 * k) * (2.0 * k + 1.0));
      const double add = term / (2.0 * k + 1.0);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    out = sum;
  } else {
    out = cisi_continued_fraction(az).si;
  }
  return z < 0 ? -out : out;
}

double cin(double z) {
  const double az = std::abs(z);
  if (az == 0.0) return 0.0;
  if (az <= kSeriesLimit) {
    const double z2 = az * az;
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k < 60; ++k) {
      term *= -z2 / ((2.0 * k - 1.0) * (2.0 * k));
      const double add = -term / (2.0 * k);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::numbers::egamma + std::log(az) - cisi_continued_fraction(az).ci;
}

double cosine_integral(double z) {
  if (!(z > 0.0)) throw std::domain_error("Ci(z) requires z > 0");
  if (z <= kSeriesLimit) return std::numbers::egamma + std::log(z) - cin(z);
  return cisi_continued_fraction(z).ci;
}

}  // namespace qsg::special
