#include "qsg/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qsg/rng.hpp"

namespace qsg {

std::string_view to_string(Law law) {
  switch (law) {
    case Law::gaussian_iid: return "gaussian";
    case Law::sphere: return "sphere";
    case Law::custom: return "custom";
  }
  return "unknown";
}

Law parse_law(std::string_view name) {
  if (name == "gaussian" || name == "gaussian_iid") return Law::gaussian_iid;
  if (name == "sphere") return Law::sphere;
  if (name == "custom" || name == "rademacher" || name == "uniform") return Law::custom;
  throw ArgumentError("unknown coefficient law: " + std::string(name));
}

CustomLawSpec CustomLawSpec::rademacher() {
  CustomLawSpec spec;
  spec.kind_ = Kind::rademacher;
  spec.variance_ = 1.0;
  spec.third_abs_ = 1.0;
  return spec;
}

CustomLawSpec CustomLawSpec::uniform() {
  CustomLawSpec spec;
  spec.kind_ = Kind::uniform;
  spec.variance_ = 1.0 / 3.0;
  // sqrt(3) U with U uniform on [-1, 1]: E|X|^3 = 3 sqrt(3) / 4.
  spec.third_abs_ = 0.75 * std::sqrt(3.0);
  return spec;
}

CustomLawSpec CustomLawSpec::user_table(std::vector<std::pair<double, double>> atoms) {
  if (atoms.empty()) throw ArgumentError("user table needs at least one atom");
  std::sort(atoms.begin(), atoms.end());
  double total = 0.0;
  double second = 0.0;
  double third = 0.0;
  for (const auto& [value, prob] : atoms) {
    if (!std::isfinite(value) || !(prob >= 0.0)) throw ArgumentError("invalid user table atom");
    total += prob;
    second += prob * value * value;
    third += prob * std::abs(value) * value * value;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ArgumentError("user table probabilities must sum to 1");
  for (std::size_t i = 0, j = atoms.size(); i < atoms.size(); ++i) {
    --j;
    if (std::abs(atoms[i].first + atoms[j].first) > 1e-12 ||
        std::abs(atoms[i].second - atoms[j].second) > 1e-12) {
      throw ArgumentError("user table law must be symmetric about 0");
    }
  }
  if (!(second > 0.0)) throw ArgumentError("user table law must have positive variance");

  CustomLawSpec spec;
  spec.kind_ = Kind::user_table;
  spec.variance_ = second;
  spec.third_abs_ = third / std::pow(second, 1.5);
  spec.atoms_ = std::move(atoms);
  double running = 0.0;
  for (const auto& atom : spec.atoms_) {
    running += atom.second;
    spec.cumulative_.push_back(running);
  }
  spec.cumulative_.back() = 1.0;
  return spec;
}

CustomLawSpec CustomLawSpec::from_name(std::string_view name) {
  if (name == "rademacher") return rademacher();
  if (name == "uniform") return uniform();
  throw ArgumentError("unknown custom law: " + std::string(name));
}

std::string_view CustomLawSpec::name() const noexcept {
  switch (kind_) {
    case Kind::rademacher: return "rademacher";
    case Kind::uniform: return "uniform";
    case Kind::user_table: return "user-table";
  }
  return "unknown";
}

CoefficientSample sample_gaussian(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ArgumentError("sample dimension must be positive");
  CounterRng rng(seed);
  CoefficientSample out{RealVector(static_cast<Eigen::Index>(dim)), Law::gaussian_iid, seed};
  for (auto& v : out.values) v = rng.normal();
  return out;
}

CoefficientSample sample_sphere(std::size_t dim, std::uint64_t seed) {
  if (dim < 2) throw ArgumentError("sphere sampling needs dimension >= 2");
  CounterRng rng(seed);
  CoefficientSample out{RealVector(static_cast<Eigen::Index>(dim)), Law::sphere, seed};
  double norm = 0.0;
  while (!(norm > 0.0)) {
    for (auto& v : out.values) v = rng.normal();
    norm = out.values.norm();
  }
  out.values /= norm;
  return out;
}

CoefficientSample sample_custom(const CustomLawSpec& spec, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ArgumentError("sample dimension must be positive");
  CounterRng rng(seed);
  CoefficientSample out{RealVector(static_cast<Eigen::Index>(dim)), Law::custom, seed};
  switch (spec.kind()) {
    case CustomLawSpec::Kind::rademacher:
      for (auto& v : out.values) v = rng.uniform() < 0.5 ? -1.0 : 1.0;
      break;
    case CustomLawSpec::Kind::uniform: {
      const double scale = std::sqrt(3.0);
      for (auto& v : out.values) v = scale * (2.0 * rng.uniform() - 1.0);
      break;
    }
    case CustomLawSpec::Kind::user_table: {
      const double scale = 1.0 / std::sqrt(spec.variance());
      for (auto& v : out.values) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(spec.cumulative_.begin(), spec.cumulative_.end(), u);
        const auto idx = static_cast<std::size_t>(it - spec.cumulative_.begin());
        v = scale * spec.atoms()[std::min(idx, spec.atoms().size() - 1)].first;
      }
      break;
    }
  }
  return out;
}

CoefficientSample sample_law(Law law, std::size_t dim, std::uint64_t seed,
                             const CustomLawSpec* custom) {
  switch (law) {
    case Law::gaussian_iid: return sample_gaussian(dim, seed);
    case Law::sphere: return sample_sphere(dim, seed);
    case Law::custom:
      return sample_custom(custom ? *custom : CustomLawSpec::rademacher(), dim, seed);
  }
  throw ArgumentError("unknown coefficient law");
}

double sphere_moment(std::size_t dim, std::span<const int> alphas) {
  if (dim == 0) throw ArgumentError("sphere dimension must be positive");
  if (alphas.size() > dim) throw DimensionError("more exponents than coordinates");
  // Even exponents: prod (a_i - 1)!! / prod_{j < |a|/2} (N + 2j), paired factor by factor.
  for (int a : alphas) {
    if (a < 0) throw ArgumentError("sphere moment exponents must be nonnegative");
  }
  std::vector<double> odd_factors;
  for (int a : alphas) {
    if (a % 2 != 0) return 0.0;
    for (int f = 1; f < a; f += 2) odd_factors.push_back(f);
  }
  const auto nd = static_cast<double>(dim);
  double value = 1.0;
  for (std::size_t j = 0; j < odd_factors.size(); ++j) {
    value *= odd_factors[j] / (nd + 2.0 * static_cast<double>(j));
  }
  return value;
}

double cosine_surrogate_series(std::size_t n, double t) {
  if (n == 0) throw ArgumentError("series dimension must be positive");
  const double x = -0.5 * t * t;
  const std::size_t k_max = std::min<std::size_t>(n, 400);
  const auto nd = static_cast<double>(n);
  double term = 1.0;
  double sum = 1.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const auto kd = static_cast<double>(k);
    term *= x / kd * (nd - kd + 1.0) / (nd + 2.0 * (kd - 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 && kd > std::abs(x)) break;
  }
  return sum;
}

MonteCarloEstimate cosine_product_mc(std::size_t n, double t, std::size_t replicas,
                                     std::uint64_t seed) {
  if (replicas < 2) throw ArgumentError("Monte Carlo estimate needs at least 2 replicas");
  std::vector<double> samples(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    const CoefficientSample x = sample_sphere(n, derive_seed(seed, r));
    double prod = 1.0;
    for (double v : x.values) prod *= std::cos(t * v);
    samples[r] = prod;
  }
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(replicas);
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double var = ss / static_cast<double>(replicas - 1);
  return {mean, std::sqrt(var / static_cast<double>(replicas))};
}

}  // namespace qsg
