#pragma once

// Symbolic Pauli strings i^k * (f_1 (x) f_2 (x) ... (x) f_n), f_j in {I, X, Y, Z}.
//
// Sites are 1-based. For state vectors, site 1 is the most significant bit
// of the basis index, so dense(P) agrees with the left-to-right Kronecker
// product I^{(x)(j-1)} (x) sigma (x) I^{(x)(n-j)}.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qsg/core.hpp"

namespace qsg {

class PauliString {
 public:
  PauliString() = default;

  /// Identity string on `n_sites` sites.
  explicit PauliString(std::size_t n_sites);

  /// Axes take values 0 (identity), 1, 2, 3; phase_exp is reduced mod 4.
  explicit PauliString(std::vector<std::uint8_t> axes, int phase_exp = 0);

  /// sigma^(axis) acting on `site` (1-based).
  static PauliString single(std::size_t n_sites, std::size_t site, int axis);

  /// sigma_i^(a) sigma_j^(b). Equal sites are resolved into one factor with phase.
  static PauliString two_site(std::size_t n_sites, std::size_t site_i, int axis_a,
                              std::size_t site_j, int axis_b);

  /// Parses "+XIZ", "-iY", "iZZ" style labels; '_' is accepted for identity.
  static PauliString from_label(const std::string& label);

  std::size_t n_sites() const noexcept { return axes_.size(); }
  std::span<const std::uint8_t> axes() const noexcept { return axes_; }
  int axis(std::size_t site) const { return axes_.at(site - 1); }
  int phase_exp() const noexcept { return phase_; }

  bool is_hermitian() const noexcept { return (phase_ & 1) == 0; }
  bool is_identity_up_to_phase() const noexcept;

  /// Number of non-identity factors.
  std::size_t weight() const noexcept;

  /// Bits flipped by the string (axes 1 and 2), in the site-1-is-MSB layout.
  std::uint64_t flip_mask() const;
  /// Bits whose value contributes a (-1) (axes 2 and 3).
  std::uint64_t sign_mask() const;
  std::size_t y_count() const noexcept;

  PauliString with_phase(int phase_exp) const;

  std::string label() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::vector<std::uint8_t> axes_;
  std::uint8_t phase_ = 0;
};

/// Exact product P * Q.
PauliString multiply(const PauliString& p, const PauliString& q);
inline PauliString operator*(const PauliString& p, const PauliString& q) { return multiply(p, q); }

/// P^{-1}: same factors with the conjugate phase.
PauliString inverse(const PauliString& p);

bool commutes(const PauliString& p, const PauliString& q);

/// tr(P); integer-valued (0 or i^k 2^n) and exactly representable as double.
Complex trace(const PauliString& p);

/// 2^{-n} tr(P) as an exact Gaussian integer in {0, 1, i, -1, -i}.
struct UnitTrace {
  int re = 0;
  int im = 0;
};
UnitTrace normalized_trace(const PauliString& p);

/// P v by bit manipulation.
ComplexVector apply(const PauliString& p, const Eigen::Ref<const ComplexVector>& v);

/// out += coeff * P v.
void apply_add(const PauliString& p, Complex coeff, const Eigen::Ref<const ComplexVector>& v,
               Eigen::Ref<ComplexVector> out);

/// exp(i theta P) v = cos(theta) v + i sin(theta) P v, for Hermitian P.
ComplexVector exp_apply(double theta, const PauliString& p,
                        const Eigen::Ref<const ComplexVector>& v);

/// Dense matrix from explicit Kronecker products of the 2x2 factors.
ComplexMatrix dense(const PauliString& p);

/// The 2x2 matrix sigma^(axis), axis in {0,1,2,3}.
Eigen::Matrix2cd pauli_matrix(int axis);

}  // namespace qsg
