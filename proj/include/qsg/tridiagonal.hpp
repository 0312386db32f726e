#pragma once

// Dense Hermitian eigenvalue kernels: Householder reduction to real
// tridiagonal form, implicit-shift QL, and tridiagonal inverse iteration.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>

namespace qsg::tridiagonal {

template <class Real>
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Reduces the lower triangle of Hermitian `a` in place to Q^H A Q = T.
/// On return diag/offdiag hold T; the reflector tails are stored below the
/// subdiagonal of `a` (implicit leading 1) with scalars in `tau`.
template <class Scalar, class Real = typename Eigen::NumTraits<Scalar>::Real>
void householder_reduce(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a, Vector<Real>& diag,
                        Vector<Real>& offdiag, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& tau) {
  using std::abs;
  using std::real;
  const Eigen::Index n = a.rows();
  diag.resize(n);
  offdiag.resize(std::max<Eigen::Index>(n - 1, 0));
  tau.setZero(std::max<Eigen::Index>(n - 1, 0));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(n);

  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const Eigen::Index m = n - i - 1;
    auto v = a.col(i).tail(m);
    const Scalar alpha = v[0];
    const Real tail_norm = m > 1 ? v.tail(m - 1).norm() : Real(0);
    Scalar t(0);
    Real beta = real(alpha);
    if (tail_norm != Real(0) || Eigen::numext::imag(alpha) != Real(0)) {
      beta = -std::copysign(std::hypot(abs(alpha), tail_norm), real(alpha));
      t = Scalar((beta - real(alpha)) / beta);
      if constexpr (Eigen::NumTraits<Scalar>::IsComplex) t = Scalar(real(t), -Eigen::numext::imag(alpha) / beta);
      if (m > 1) v.tail(m - 1) *= Scalar(1) / (alpha - beta);
    }
    offdiag[i] = beta;
    if (t != Scalar(0)) {
      v[0] = Scalar(1);
      auto block = a.bottomRightCorner(m, m);
      auto wt = w.head(m);
      wt.noalias() = t * (block.template selfadjointView<Eigen::Lower>() * v);
      const Scalar shift = Real(-0.5) * t * wt.dot(v);
      wt += shift * v;
      block.template selfadjointView<Eigen::Lower>().rankUpdate(v, wt, Scalar(-1));
    }
    v[0] = Scalar(beta);
    tau[i] = t;
  }
  for (Eigen::Index i = 0; i < n; ++i) diag[i] = real(a(i, i));
}

/// Applies Q = H_0 H_1 ... H_{n-2} from householder_reduce to `z` in place.
template <class Scalar, class Derived>
void apply_reflectors(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& reduced,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& tau,
                      Eigen::MatrixBase<Derived>& z) {
  const Eigen::Index n = reduced.rows();
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    if (tau[i] == Scalar(0)) continue;
    const Eigen::Index m = n - i - 1;
    // v = [1; reduced(i+2:, i)]
    Scalar proj = z(i + 1);
    if (m > 1) proj += reduced.col(i).tail(m - 1).dot(z.tail(m - 1));
    const Scalar s = tau[i] * proj;
    z(i + 1) -= s;
    if (m > 1) z.tail(m - 1) -= s * reduced.col(i).tail(m - 1);
  }
}

/// Eigenvalues of the symmetric tridiagonal (diag, offdiag) by implicit QL.
/// Off-diagonals are deflated once |e_m| <= 1e-14 (|d_m| + |d_{m+1}|).
/// Returns eigenvalues in ascending order.
template <class Real>
Vector<Real> ql_eigenvalues(Vector<Real> d, const Vector<Real>& offdiag) {
  const Eigen::Index n = d.size();
  if (n == 0) return d;
  Vector<Real> e = Vector<Real>::Zero(n);
  e.head(n - 1) = offdiag;
  const Real tol = Real(1e-14);
  Eigen::Index budget = 30 * n;

  for (Eigen::Index l = 0; l < n; ++l) {
    while (true) {
      Eigen::Index m = l;
      for (; m + 1 < n; ++m) {
        const Real dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= tol * dd) break;
      }
      if (m == l) break;
      if (budget-- == 0) throw std::runtime_error("tridiagonal QL failed to converge");
      Real g = (d[l + 1] - d[l]) / (Real(2) * e[l]);
      Real r = std::hypot(g, Real(1));
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      Real s = 1, c = 1, p = 0;
      Eigen::Index i = m - 1;
      bool underflow = false;
      for (; i >= l; --i) {
        Real f = s * e[i];
        const Real b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == Real(0)) {
          d[i + 1] -= p;
          e[m] = 0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + Real(2) * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0;
    }
  }
  std::sort(d.begin(), d.end());
  return d;
}

/// Unit eigenvector of the symmetric tridiagonal for an (approximate)
/// eigenvalue, by inverse iteration with partial-pivot LU.
template <class Real>
Vector<Real> inverse_iteration(const Vector<Real>& d, const Vector<Real>& offdiag, Real lambda,
                               int sweeps = 3) {
  const Eigen::Index n = d.size();
  Vector<Real> x = Vector<Real>::Ones(n);
  if (n == 1) return x;
  const Real scale = std::max<Real>(d.cwiseAbs().maxCoeff() + (n > 1 ? offdiag.cwiseAbs().maxCoeff() : 0),
                                    std::numeric_limits<Real>::min());
  const Real tiny = std::numeric_limits<Real>::epsilon() * scale;

  // LU of T - lambda I with row interchanges: rows i, i+1 may swap.
  Vector<Real> u0(n), u1(n), u2(n), l(n);
  Eigen::Matrix<bool, Eigen::Dynamic, 1> swapped(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    u0[i] = d[i] - lambda;
    u1[i] = i + 1 < n ? offdiag[i] : Real(0);
    u2[i] = 0;
  }
  Vector<Real> sub = offdiag;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    swapped[i] = std::abs(sub[i]) > std::abs(u0[i]);
    if (swapped[i]) {
      const Real factor = u0[i] / sub[i];
      l[i] = factor;
      const Real next0 = d[i + 1] - lambda;
      const Real next1 = i + 2 < n ? offdiag[i + 1] : Real(0);
      u0[i] = sub[i];
      const Real old1 = u1[i];
      u1[i] = next0;
      u2[i] = next1;
      u0[i + 1] = old1 - factor * next0;
      u1[i + 1] = -factor * next1;
    } else {
      if (u0[i] == Real(0)) u0[i] = tiny;
      const Real factor = sub[i] / u0[i];
      l[i] = factor;
      u0[i + 1] = (d[i + 1] - lambda) - factor * u1[i];
      u1[i + 1] = i + 2 < n ? offdiag[i + 1] : Real(0);
    }
  }
  if (u0[n - 1] == Real(0)) u0[n - 1] = tiny;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(u0[i]) < tiny) u0[i] = std::copysign(tiny, u0[i]);
  }

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      if (swapped[i]) {
        std::swap(x[i], x[i + 1]);
        x[i + 1] -= l[i] * x[i];
      } else {
        x[i + 1] -= l[i] * x[i];
      }
    }
    x[n - 1] /= u0[n - 1];
    x[n - 2] = (x[n - 2] - u1[n - 2] * x[n - 1]) / u0[n - 2];
    for (Eigen::Index i = n - 3; i >= 0; --i) {
      x[i] = (x[i] - u1[i] * x[i + 1] - u2[i] * x[i + 2]) / u0[i];
    }
    x /= x.norm();
  }
  return x;
}

}  // namespace qsg::tridiagonal
