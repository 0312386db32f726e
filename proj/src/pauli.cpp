#include "qsg/pauli.hpp"

#include <bit>
#include <cmath>
#include <utility>

namespace qsg {
namespace {

void check_axis(int axis) {
  if (axis < 0 || axis > 3) throw ArgumentError("Pauli axis must be in {0,1,2,3}");
}

// sigma^a sigma^b = i^{phase} sigma^c.
struct SiteProduct {
  std::uint8_t axis;
  std::uint8_t phase;
};

constexpr SiteProduct site_product(std::uint8_t a, std::uint8_t b) {
  if (a == 0) return {b, 0};
  if (b == 0) return {a, 0};
  if (a == b) return {0, 0};
  const auto c = static_cast<std::uint8_t>(6 - a - b);
  // (1,2), (2,3), (3,1) are the cyclic orderings: +i.
  const bool cyclic = (b == a % 3 + 1);
  return {c, static_cast<std::uint8_t>(cyclic ? 1 : 3)};
}

std::uint8_t reduce_phase(int k) { return static_cast<std::uint8_t>(((k % 4) + 4) % 4); }

Complex i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void check_state(const PauliString& p, Eigen::Index size) {
  const auto dim = hilbert_dimension(p.n_sites());
  if (static_cast<std::size_t>(size) != dim) {
    throw DimensionError("state vector length must be 2^n_sites");
  }
}

}  // namespace

PauliString::PauliString(std::size_t n_sites) : axes_(n_sites, 0) {
  if (n_sites == 0) throw ArgumentError("a Pauli string needs at least one site");
}

PauliString::PauliString(std::vector<std::uint8_t> axes, int phase_exp)
    : axes_(std::move(axes)), phase_(reduce_phase(phase_exp)) {
  if (axes_.empty()) throw ArgumentError("a Pauli string needs at least one site");
  for (auto a : axes_) check_axis(a);
}

PauliString PauliString::single(std::size_t n_sites, std::size_t site, int axis) {
  check_axis(axis);
  if (site < 1 || site > n_sites) throw ArgumentError("site index out of range");
  PauliString p(n_sites);
  p.axes_[site - 1] = static_cast<std::uint8_t>(axis);
  return p;
}

PauliString PauliString::two_site(std::size_t n_sites, std::size_t site_i, int axis_a,
                                  std::size_t site_j, int axis_b) {
  return multiply(single(n_sites, site_i, axis_a), single(n_sites, site_j, axis_b));
}

PauliString PauliString::from_label(const std::string& label) {
  std::size_t pos = 0;
  int phase = 0;
  if (pos < label.size() && (label[pos] == '+' || label[pos] == '-')) {
    if (label[pos] == '-') phase = 2;
    ++pos;
  }
  if (pos < label.size() && label[pos] == 'i') {
    phase += 1;
    ++pos;
  }
  std::vector<std::uint8_t> axes;
  for (; pos < label.size(); ++pos) {
    switch (label[pos]) {
      case 'I': case '_': axes.push_back(0); break;
      case 'X': axes.push_back(1); break;
      case 'Y': axes.push_back(2); break;
      case 'Z': axes.push_back(3); break;
      default: throw ArgumentError("bad Pauli label: " + label);
    }
  }
  return PauliString(std::move(axes), phase);
}

bool PauliString::is_identity_up_to_phase() const noexcept {
  for (auto a : axes_) {
    if (a != 0) return false;
  }
  return true;
}

std::size_t PauliString::weight() const noexcept {
  std::size_t w = 0;
  for (auto a : axes_) w += (a != 0);
  return w;
}

std::uint64_t PauliString::flip_mask() const {
  if (n_sites() > 64) throw SizeError("bit masks limited to 64 sites");
  std::uint64_t mask = 0;
  const std::size_t n = n_sites();
  for (std::size_t j = 0; j < n; ++j) {
    if (axes_[j] == 1 || axes_[j] == 2) mask |= std::uint64_t{1} << (n - 1 - j);
  }
  return mask;
}

std::uint64_t PauliString::sign_mask() const {
  if (n_sites() > 64) throw SizeError("bit masks limited to 64 sites");
  std::uint64_t mask = 0;
  const std::size_t n = n_sites();
  for (std::size_t j = 0; j < n; ++j) {
    if (axes_[j] == 2 || axes_[j] == 3) mask |= std::uint64_t{1} << (n - 1 - j);
  }
  return mask;
}

std::size_t PauliString::y_count() const noexcept {
  std::size_t count = 0;
  for (auto a : axes_) count += (a == 2);
  return count;
}

PauliString PauliString::with_phase(int phase_exp) const {
  PauliString p = *this;
  p.phase_ = reduce_phase(phase_exp);
  return p;
}

std::string PauliString::label() const {
  static constexpr const char* kPrefix[] = {"+", "+i", "-", "-i"};
  std::string out = kPrefix[phase_];
  for (auto a : axes_) out.push_back("IXYZ"[a]);
  return out;
}

PauliString multiply(const PauliString& p, const PauliString& q) {
  if (p.n_sites() != q.n_sites()) throw DimensionError("Pauli strings act on different site counts");
  std::vector<std::uint8_t> axes(p.n_sites());
  int phase = p.phase_exp() + q.phase_exp();
  for (std::size_t j = 0; j < axes.size(); ++j) {
    const auto prod = site_product(p.axes()[j], q.axes()[j]);
    axes[j] = prod.axis;
    phase += prod.phase;
  }
  return PauliString(std::move(axes), phase);
}

PauliString inverse(const PauliString& p) { return p.with_phase(-p.phase_exp()); }

bool commutes(const PauliString& p, const PauliString& q) {
  if (p.n_sites() != q.n_sites()) throw DimensionError("Pauli strings act on different site counts");
  std::size_t anticommuting = 0;
  for (std::size_t j = 0; j < p.n_sites(); ++j) {
    const auto a = p.axes()[j];
    const auto b = q.axes()[j];
    anticommuting += (a != 0 && b != 0 && a != b);
  }
  return anticommuting % 2 == 0;
}

UnitTrace normalized_trace(const PauliString& p) {
  if (!p.is_identity_up_to_phase()) return {};
  switch (p.phase_exp()) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

Complex trace(const PauliString& p) {
  const UnitTrace t = normalized_trace(p);
  const double scale = std::ldexp(1.0, static_cast<int>(p.n_sites()));
  return {t.re * scale, t.im * scale};
}

void apply_add(const PauliString& p, Complex coeff, const Eigen::Ref<const ComplexVector>& v,
               Eigen::Ref<ComplexVector> out) {
  check_state(p, v.size());
  if (out.size() != v.size()) throw DimensionError("output length must match input length");
  const std::uint64_t flip = p.flip_mask();
  const std::uint64_t sign = p.sign_mask();
  const Complex factor = coeff * i_power(p.phase_exp() + static_cast<int>(p.y_count()));
  const auto dim = static_cast<std::uint64_t>(v.size());
  for (std::uint64_t b = 0; b < dim; ++b) {
    const bool negative = std::popcount(b & sign) & 1;
    out[static_cast<Eigen::Index>(b ^ flip)] += negative ? -factor * v[b] : factor * v[b];
  }
}

ComplexVector apply(const PauliString& p, const Eigen::Ref<const ComplexVector>& v) {
  ComplexVector out = ComplexVector::Zero(v.size());
  apply_add(p, Complex{1.0, 0.0}, v, out);
  return out;
}

ComplexVector exp_apply(double theta, const PauliString& p,
                        const Eigen::Ref<const ComplexVector>& v) {
  if (!p.is_hermitian()) throw ContractError("exp_apply requires a Hermitian Pauli string");
  ComplexVector out = std::cos(theta) * v;
  apply_add(p, Complex{0.0, std::sin(theta)}, v, out);
  return out;
}

Eigen::Matrix2cd pauli_matrix(int axis) {
  check_axis(axis);
  const Complex i{0.0, 1.0};
  Eigen::Matrix2cd m;
  switch (axis) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -i, i, 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

ComplexMatrix dense(const PauliString& p) {
  if (p.n_sites() > kMaxDenseSites) throw SizeError("dense materialization limited to 14 sites");
  ComplexMatrix acc = ComplexMatrix::Identity(1, 1) * i_power(p.phase_exp());
  for (auto a : p.axes()) {
    const Eigen::Matrix2cd f = pauli_matrix(a);
    ComplexMatrix next(acc.rows() * 2, acc.cols() * 2);
    for (Eigen::Index r = 0; r < acc.rows(); ++r) {
      for (Eigen::Index c = 0; c < acc.cols(); ++c) {
        next.block<2, 2>(2 * r, 2 * c) = acc(r, c) * f;
      }
    }
    acc = std::move(next);
  }
  return acc;
}

}  // namespace qsg
