#include "qsg/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <set>

namespace qsg {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void check_site(std::size_t site, std::size_t n) {
  if (site < 1 || site > n) throw ArgumentError("edge endpoint out of range");
}

// Lexicographic k-subsets of {1..n}.
std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current(k);
  for (std::size_t i = 0; i < k; ++i) current[i] = i + 1;
  while (true) {
    out.push_back(current);
    std::size_t i = k;
    while (i > 0 && current[i - 1] == n - k + i) --i;
    if (i == 0) break;
    ++current[i - 1];
    for (std::size_t j = i; j < k; ++j) current[j] = current[j - 1] + 1;
  }
  return out;
}

std::size_t power_of_three(std::size_t p) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < p; ++i) out *= 3;
  return out;
}

std::vector<PauliString> pair_strings(std::size_t n,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<PauliString> out;
  out.reserve(9 * pairs.size());
  for (int a = 1; a <= 3; ++a) {
    for (int b = 1; b <= 3; ++b) {
      for (const auto& [i, j] : pairs) out.push_back(PauliString::two_site(n, i, a, j, b));
    }
  }
  return out;
}

void check_same_build(const HamiltonianOperator& h, const HamiltonianOperator& g) {
  if (h.n_sites() != g.n_sites() || h.coefficients().size() != g.coefficients().size()) {
    throw DimensionError("operators come from different geometries");
  }
  if (!(h.geometry() == g.geometry()) || h.normalization() != g.normalization()) {
    throw ArgumentError("operators come from different builds");
  }
}

}  // namespace

std::size_t n_sites(const CouplingGeometry& geometry) {
  return std::visit([](const auto& g) { return g.n; }, geometry);
}

std::string model_name(const CouplingGeometry& geometry) {
  return std::visit(Overloaded{[](const ChainGeometry&) { return std::string("chain"); },
                               [](const GraphGeometry&) { return std::string("graph"); },
                               [](const PSpinGeometry&) { return std::string("pspin"); }},
                    geometry);
}

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (std::size_t i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

std::size_t coefficient_dimension(const CouplingGeometry& geometry) {
  return std::visit(
      Overloaded{[](const ChainGeometry& g) { return 9 * g.n; },
                 [](const GraphGeometry& g) { return 9 * g.edges.size(); },
                 [](const PSpinGeometry& g) {
                   return power_of_three(g.p) * static_cast<std::size_t>(binomial(g.n, g.p));
                 }},
      geometry);
}

void validate(const CouplingGeometry& geometry) {
  const std::size_t n = n_sites(geometry);
  if (n == 0) throw ArgumentError("geometry needs at least one site");
  if (n > kMaxStateSites) throw SizeError("state vectors limited to 26 sites");
  std::visit(Overloaded{[](const ChainGeometry&) {},
                        [](const GraphGeometry& g) {
                          if (g.edges.empty()) throw ArgumentError("graph needs at least one edge");
                          std::set<std::pair<std::size_t, std::size_t>> seen;
                          for (auto [i, j] : g.edges) {
                            check_site(i, g.n);
                            check_site(j, g.n);
                            if (i == j) throw ArgumentError("graph edges must not be self-loops");
                            if (!seen.insert(std::minmax(i, j)).second) {
                              throw ArgumentError("graph edges must be distinct");
                            }
                          }
                        },
                        [](const PSpinGeometry& g) {
                          if (g.p < 1 || g.p > g.n) throw ArgumentError("p-spin order must satisfy 1 <= p <= n");
                        }},
             geometry);
}

double normalization(const CouplingGeometry& geometry, Law law) {
  if (law == Law::sphere) return 1.0;
  return std::visit(
      Overloaded{[](const ChainGeometry& g) { return 1.0 / (3.0 * std::sqrt(double(g.n))); },
                 [](const GraphGeometry& g) {
                   return 1.0 / (3.0 * std::sqrt(double(g.edges.size())));
                 },
                 [](const PSpinGeometry& g) {
                   return std::pow(3.0, -0.5 * double(g.p)) / std::sqrt(double(binomial(g.n, g.p)));
                 }},
      geometry);
}

GraphGeometry chain_as_graph(std::size_t n) {
  GraphGeometry g{n, {}};
  for (std::size_t j = 1; j <= n; ++j) g.edges.emplace_back(j, j % n + 1);
  return g;
}

GraphGeometry complete_graph(std::size_t n) {
  GraphGeometry g{n, {}};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) g.edges.emplace_back(i, j);
  }
  return g;
}

CouplingGeometry geometry_from_json(const nlohmann::json& j) {
  const std::string model = j.at("model").get<std::string>();
  const auto n = j.at("n").get<std::size_t>();
  CouplingGeometry out;
  if (model == "chain") {
    out = ChainGeometry{n};
  } else if (model == "graph") {
    GraphGeometry g{n, {}};
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ArgumentError("edges must be [i, j] pairs");
      g.edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
    out = std::move(g);
  } else if (model == "pspin") {
    out = PSpinGeometry{n, j.at("p").get<std::size_t>()};
  } else {
    throw ArgumentError("unknown model: " + model);
  }
  validate(out);
  return out;
}

nlohmann::json geometry_to_json(const CouplingGeometry& geometry) {
  nlohmann::json j;
  j["model"] = model_name(geometry);
  j["n"] = n_sites(geometry);
  if (const auto* g = std::get_if<GraphGeometry>(&geometry)) {
    j["edges"] = nlohmann::json::array();
    for (auto [a, b] : g->edges) j["edges"].push_back({a, b});
  }
  if (const auto* g = std::get_if<PSpinGeometry>(&geometry)) j["p"] = g->p;
  return j;
}

std::vector<PauliString> term_strings(const CouplingGeometry& geometry) {
  validate(geometry);
  return std::visit(
      Overloaded{
          [](const ChainGeometry& g) {
            std::vector<std::pair<std::size_t, std::size_t>> pairs;
            for (std::size_t j = 1; j <= g.n; ++j) pairs.emplace_back(j, j % g.n + 1);
            return pair_strings(g.n, pairs);
          },
          [](const GraphGeometry& g) { return pair_strings(g.n, g.edges); },
          [](const PSpinGeometry& g) {
            const auto sets = subsets(g.n, g.p);
            const std::size_t assignments = power_of_three(g.p);
            std::vector<PauliString> out;
            out.reserve(assignments * sets.size());
            std::vector<int> axes(g.p);
            for (std::size_t code = 0; code < assignments; ++code) {
              std::size_t rest = code;
              for (std::size_t k = g.p; k-- > 0;) {
                axes[k] = static_cast<int>(rest % 3) + 1;
                rest /= 3;
              }
              for (const auto& s : sets) {
                std::vector<std::uint8_t> string(g.n, 0);
                for (std::size_t k = 0; k < g.p; ++k) string[s[k] - 1] = static_cast<std::uint8_t>(axes[k]);
                out.emplace_back(std::move(string));
              }
            }
            return out;
          }},
      geometry);
}

HamiltonianOperator::HamiltonianOperator(CouplingGeometry geometry, Law law, RealVector coefficients)
    : geometry_(std::move(geometry)),
      law_(law),
      n_sites_(qsg::n_sites(geometry_)),
      normalization_(qsg::normalization(geometry_, law)),
      coefficients_(std::move(coefficients)) {
  validate(geometry_);
  if (static_cast<std::size_t>(coefficients_.size()) != coefficient_dimension(geometry_)) {
    throw ArgumentError("coefficient count does not match the geometry");
  }
  auto strings = term_strings(geometry_);
  terms_.reserve(strings.size());
  compiled_.reserve(strings.size());
  static constexpr Complex kPhase[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (std::size_t k = 0; k < strings.size(); ++k) {
    const double c = normalization_ * coefficients_[static_cast<Eigen::Index>(k)];
    const auto& s = strings[k];
    const int phase = (s.phase_exp() + static_cast<int>(s.y_count())) % 4;
    compiled_.push_back({s.flip_mask(), s.sign_mask(), c * kPhase[phase]});
    terms_.push_back({c, std::move(strings[k])});
  }
}

void HamiltonianOperator::apply_add(const Eigen::Ref<const ComplexVector>& v,
                                    Eigen::Ref<ComplexVector> out) const {
  const auto dim = static_cast<Eigen::Index>(dimension());
  if (v.size() != dim || out.size() != dim) throw DimensionError("state vector length must be 2^n_sites");
  const auto udim = static_cast<std::uint64_t>(dim);
  for (const auto& t : compiled_) {
    if (t.factor == Complex{}) continue;
    for (std::uint64_t b = 0; b < udim; ++b) {
      const Complex term = t.factor * v[static_cast<Eigen::Index>(b)];
      out[static_cast<Eigen::Index>(b ^ t.flip)] += (std::popcount(b & t.sign) & 1) ? -term : term;
    }
  }
}

HamiltonianOperator build_chain(std::size_t n, const CoefficientSample& x) {
  return build(ChainGeometry{n}, x);
}

HamiltonianOperator build_graph(const GraphGeometry& geometry, const CoefficientSample& x) {
  return build(geometry, x);
}

HamiltonianOperator build_pspin(std::size_t n, std::size_t p, const CoefficientSample& x) {
  return build(PSpinGeometry{n, p}, x);
}

HamiltonianOperator build(const CouplingGeometry& geometry, const CoefficientSample& x) {
  return HamiltonianOperator(geometry, x.law, x.values);
}

ComplexVector matvec(const HamiltonianOperator& h, const Eigen::Ref<const ComplexVector>& v) {
  ComplexVector out = ComplexVector::Zero(v.size());
  h.apply_add(v, out);
  return out;
}

ComplexMatrix dense(const HamiltonianOperator& h) {
  if (h.n_sites() > kMaxDenseSites) throw SizeError("dense materialization limited to 14 sites");
  const auto dim = static_cast<Eigen::Index>(h.dimension());
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  static constexpr Complex kPhase[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (const auto& term : h.terms()) {
    if (term.coefficient == 0.0) continue;
    const auto& s = term.string;
    const std::uint64_t flip = s.flip_mask();
    const std::uint64_t sign = s.sign_mask();
    const Complex factor = term.coefficient * kPhase[(s.phase_exp() + s.y_count()) % 4];
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(dim); ++b) {
      m(static_cast<Eigen::Index>(b ^ flip), static_cast<Eigen::Index>(b)) +=
          (std::popcount(b & sign) & 1) ? -factor : factor;
    }
  }
  return m;
}

double hs_norm_squared(const HamiltonianOperator& h) {
  const double scale = std::ldexp(1.0, static_cast<int>(h.n_sites()));
  return scale * h.normalization() * h.normalization() * h.coefficients().squaredNorm();
}

double hs_distance(const HamiltonianOperator& h, const HamiltonianOperator& h_prime) {
  check_same_build(h, h_prime);
  const double scale = std::ldexp(1.0, static_cast<int>(h.n_sites()));
  return std::sqrt(scale) * h.normalization() * (h.coefficients() - h_prime.coefficients()).norm();
}

double hs_distance_dense(const HamiltonianOperator& h, const HamiltonianOperator& h_prime) {
  check_same_build(h, h_prime);
  return (dense(h) - dense(h_prime)).norm();
}

}  // namespace qsg
