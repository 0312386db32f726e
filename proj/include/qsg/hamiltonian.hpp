#pragma once

// Random Pauli Hamiltonians on chain, graph and p-spin coupling geometries.
//
// Coefficients are indexed lexicographically: for the chain, x_{a,b,j} sits at
// ((a-1)*3 + (b-1))*n + (j-1); graphs use the edge position in place of j;
// p-spin uses (axis tuple index)*C(n,p) + (subset index), with subsets in
// lexicographic order.

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qsg/core.hpp"
#include "qsg/ensembles.hpp"
#include "qsg/pauli.hpp"

namespace qsg {

struct ChainGeometry {
  std::size_t n = 0;
  friend bool operator==(const ChainGeometry&, const ChainGeometry&) = default;
};

struct GraphGeometry {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // 1-indexed
  friend bool operator==(const GraphGeometry&, const GraphGeometry&) = default;
};

struct PSpinGeometry {
  std::size_t n = 0;
  std::size_t p = 0;
  friend bool operator==(const PSpinGeometry&, const PSpinGeometry&) = default;
};

using CouplingGeometry = std::variant<ChainGeometry, GraphGeometry, PSpinGeometry>;

std::size_t n_sites(const CouplingGeometry& geometry);
std::string model_name(const CouplingGeometry& geometry);

/// Number of coefficients the geometry consumes: 9n, 9e or 3^p C(n,p).
std::size_t coefficient_dimension(const CouplingGeometry& geometry);

/// Throws ArgumentError when the geometry violates its invariants.
void validate(const CouplingGeometry& geometry);

/// Overall scale for the given law; sphere coefficients are used as-is.
double normalization(const CouplingGeometry& geometry, Law law);

GraphGeometry chain_as_graph(std::size_t n);
GraphGeometry complete_graph(std::size_t n);

/// Reads {"model": "chain"|"graph"|"pspin", "n": int, "edges": [[i,j],...], "p": int}.
CouplingGeometry geometry_from_json(const nlohmann::json& j);
nlohmann::json geometry_to_json(const CouplingGeometry& geometry);

std::uint64_t binomial(std::size_t n, std::size_t k);

/// One Pauli string per coefficient, in coefficient order, without scaling.
std::vector<PauliString> term_strings(const CouplingGeometry& geometry);

struct HamiltonianTerm {
  double coefficient = 0.0;
  PauliString string;
};

class HamiltonianOperator {
 public:
  HamiltonianOperator(CouplingGeometry geometry, Law law, RealVector coefficients);

  std::size_t n_sites() const noexcept { return n_sites_; }
  std::size_t dimension() const noexcept { return std::size_t{1} << n_sites_; }
  const CouplingGeometry& geometry() const noexcept { return geometry_; }
  Law law() const noexcept { return law_; }
  double normalization() const noexcept { return normalization_; }
  /// Raw coefficient vector x, before normalization.
  const RealVector& coefficients() const noexcept { return coefficients_; }
  /// Terms with the normalization folded into each coefficient.
  const std::vector<HamiltonianTerm>& terms() const noexcept { return terms_; }

  /// out += H v.
  void apply_add(const Eigen::Ref<const ComplexVector>& v, Eigen::Ref<ComplexVector> out) const;

 private:
  struct CompiledTerm {
    std::uint64_t flip;
    std::uint64_t sign;
    Complex factor;
  };

  CouplingGeometry geometry_;
  Law law_;
  std::size_t n_sites_;
  double normalization_;
  RealVector coefficients_;
  std::vector<HamiltonianTerm> terms_;
  std::vector<CompiledTerm> compiled_;
};

HamiltonianOperator build_chain(std::size_t n, const CoefficientSample& x);
HamiltonianOperator build_graph(const GraphGeometry& geometry, const CoefficientSample& x);
HamiltonianOperator build_pspin(std::size_t n, std::size_t p, const CoefficientSample& x);
HamiltonianOperator build(const CouplingGeometry& geometry, const CoefficientSample& x);

ComplexVector matvec(const HamiltonianOperator& h, const Eigen::Ref<const ComplexVector>& v);

/// Dense 2^n x 2^n matrix; n <= kMaxDenseSites.
ComplexMatrix dense(const HamiltonianOperator& h);

/// ||H||_HS^2 = tr(H^2) from the coefficients, assuming orthogonal terms.
double hs_norm_squared(const HamiltonianOperator& h);

/// ||H - H'||_HS = 2^{n/2} * normalization * ||x - x'||.
double hs_distance(const HamiltonianOperator& h, const HamiltonianOperator& h_prime);

/// ||H - H'||_HS from the dense matrices.
double hs_distance_dense(const HamiltonianOperator& h, const HamiltonianOperator& h_prime);

}  // namespace qsg
