#include "qsg/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>

#include "qsg/special.hpp"

namespace qsg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// Convex piecewise-linear function of one variable kept as two heaps of
// slope breakpoints around its minimizing segment, with lazy shifts.
class ConvexPiecewise {
 public:
  explicit ConvexPiecewise(double bound) {
    push_left(-bound, kInf);
    push_right(bound, kInf);
  }

  double left_end() const { return left_.top().pos + left_shift_; }
  double right_end() const { return right_.top().pos + right_shift_; }

  // g(y) = min_{|z - y| <= d} f(z)
  void widen(double d) {
    left_shift_ -= d;
    right_shift_ += d;
  }

  // f + indicator([-bound, bound])
  void restrict_to(double bound) {
    if (right_end() < -bound) {
      double acc = 0.0;
      while (right_end() < -bound) {
        acc += right_.top().weight;
        right_.pop();
      }
      if (acc > 0.0) push_right(-bound, acc);
      push_left(-bound, kInf);
    } else if (left_end() > bound) {
      double acc = 0.0;
      while (left_end() > bound) {
        acc += left_.top().weight;
        left_.pop();
      }
      if (acc > 0.0) push_left(bound, acc);
      push_right(bound, kInf);
    } else {
      push_left(-bound, kInf);
      push_right(bound, kInf);
    }
  }

  // f + slope * y
  void add_linear(double slope) {
    double remaining = std::abs(slope);
    const bool move_left_to_right = slope > 0.0;
    while (remaining > 0.0) {
      if (move_left_to_right) {
        const Breakpoint top = left_.top();
        const double pos = top.pos + left_shift_;
        left_.pop();
        if (top.weight <= remaining) {
          push_right(pos, top.weight);
          remaining -= top.weight;
        } else {
          push_right(pos, remaining);
          push_left(pos, top.weight - remaining);
          remaining = 0.0;
        }
      } else {
        const Breakpoint top = right_.top();
        const double pos = top.pos + right_shift_;
        right_.pop();
        if (top.weight <= remaining) {
          push_left(pos, top.weight);
          remaining -= top.weight;
        } else {
          push_left(pos, remaining);
          push_right(pos, top.weight - remaining);
          remaining = 0.0;
        }
      }
    }
  }

 private:
  struct Breakpoint {
    double pos;
    double weight;
  };
  struct Lower {
    bool operator()(const Breakpoint& a, const Breakpoint& b) const { return a.pos < b.pos; }
  };
  struct Greater {
    bool operator()(const Breakpoint& a, const Breakpoint& b) const { return a.pos > b.pos; }
  };

  void push_left(double pos, double weight) { left_.push({pos - left_shift_, weight}); }
  void push_right(double pos, double weight) { right_.push({pos - right_shift_, weight}); }

  std::priority_queue<Breakpoint, std::vector<Breakpoint>, Lower> left_;
  std::priority_queue<Breakpoint, std::vector<Breakpoint>, Greater> right_;
  double left_shift_ = 0.0;
  double right_shift_ = 0.0;
};

struct SignedSupport {
  std::vector<double> points;
  std::vector<double> weights;
};

SignedSupport signed_difference(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  SignedSupport out;
  const auto& xa = mu.points();
  const auto& xb = nu.points();
  std::size_t i = 0, j = 0;
  while (i < xa.size() || j < xb.size()) {
    double x;
    double w = 0.0;
    if (j == xb.size() || (i < xa.size() && xa[i] < xb[j])) {
      x = xa[i];
      w = mu.weights()[i++];
    } else if (i == xa.size() || xb[j] < xa[i]) {
      x = xb[j];
      w = -nu.weights()[j++];
    } else {
      x = xa[i];
      w = mu.weights()[i++] - nu.weights()[j++];
    }
    if (w != 0.0) {
      out.points.push_back(x);
      out.weights.push_back(w);
    }
  }
  // Canonical sign: d(mu, nu) and d(nu, mu) see identical inputs.
  const auto first = std::find_if(out.weights.begin(), out.weights.end(), [](double w) { return w != 0.0; });
  if (first != out.weights.end() && *first < 0.0) {
    for (double& w : out.weights) w = -w;
  }
  return out;
}

// max c^T x subject to A x <= b, x >= 0, with b >= 0; Bland's rule.
double simplex_max(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index vars = a.cols();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(rows + 1, vars + rows + 1);
  t.topLeftCorner(rows, vars) = a;
  t.block(0, vars, rows, rows).setIdentity();
  t.col(vars + rows).head(rows) = b;
  t.row(rows).head(vars) = -c.transpose();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  std::iota(basis.begin(), basis.end(), vars);
  const double eps = 1e-12;
  const double pivot_eps = 1e-9;

  for (int guard = 0; guard < 1000000; ++guard) {
    Eigen::Index enter = -1;
    for (Eigen::Index k = 0; k < vars + rows; ++k) {
      if (t(rows, k) < -eps) {
        enter = k;
        break;
      }
    }
    if (enter < 0) return t(rows, vars + rows);
    Eigen::Index leave = -1;
    double best = kInf;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (t(r, enter) > pivot_eps) {
        const double ratio = t(r, vars + rows) / t(r, enter);
        if (ratio < best - eps ||
            (std::abs(ratio - best) <= eps && leave >= 0 && basis[r] < basis[leave])) {
          best = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) throw ContractError("linear program is unbounded");
    const double pivot = t(leave, enter);
    t.row(leave) /= pivot;
    for (Eigen::Index r = 0; r <= rows; ++r) {
      const double factor = t(r, enter);
      if (r != leave && factor != 0.0) t.row(r) -= factor * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  throw ContractError("simplex iteration limit reached");
}

// Joint LP over (f, L) with ||f||_inf <= 1 - L and Lip(f) <= L; g = f + 1.
double dbl_dense_lp(const SignedSupport& s) {
  const auto m = static_cast<Eigen::Index>(s.points.size());
  if (m > 400) throw SizeError("dense LP limited to 400 support points");
  const Eigen::Index vars = m + 1;
  const Eigen::Index rows = 2 * m + 2 * (m - 1) + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, vars);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(vars);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    a(r, i) = 1.0;
    a(r, m) = 1.0;
    b[r++] = 2.0;
    a(r, i) = -1.0;
    a(r, m) = 1.0;
    b[r++] = 0.0;
  }
  // Support points are sorted, so neighbouring slopes bound the Lipschitz constant.
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    const double gap = s.points[i + 1] - s.points[i];
    for (double sign : {1.0, -1.0}) {
      a(r, i) = sign;
      a(r, i + 1) = -sign;
      a(r, m) = -gap;
      b[r++] = 0.0;
    }
  }
  a(r, m) = 1.0;
  b[r] = 1.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    c[i] = s.weights[i];
    total += s.weights[i];
  }
  return simplex_max(a, b, c) - total;
}

double gaussian_antiderivative(double x) { return x * special::normal_cdf(x) + special::normal_pdf(x); }

}  // namespace

// ---------------------------------------------------------------- ReferenceLaw

ReferenceLaw ReferenceLaw::semicircle(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ArgumentError("semicircle radius must be positive");
  return ReferenceLaw(Kind::semicircle, radius);
}

std::string ReferenceLaw::name() const { return kind_ == Kind::gaussian ? "gaussian" : "semicircle"; }

double ReferenceLaw::pdf(double x) const {
  if (kind_ == Kind::gaussian) return special::normal_pdf(x);
  if (std::abs(x) >= radius_) return 0.0;
  return 2.0 / (std::numbers::pi * radius_ * radius_) * std::sqrt(radius_ * radius_ - x * x);
}

double ReferenceLaw::cdf(double x) const {
  if (kind_ == Kind::gaussian) return special::normal_cdf(x);
  if (x <= -radius_) return 0.0;
  if (x >= radius_) return 1.0;
  const double u = x / radius_;
  return 0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / std::numbers::pi;
}

double ReferenceLaw::cdf_antiderivative(double x) const {
  if (kind_ == Kind::gaussian) return gaussian_antiderivative(x);
  if (x <= -radius_) return 0.0;
  if (x >= radius_) return x;
  const double u = x / radius_;
  const double root = std::sqrt(1.0 - u * u);
  return radius_ * (0.5 * u + (-root * root * root / 3.0 + u * std::asin(u) + root) / std::numbers::pi);
}

double ReferenceLaw::quantile(double p, double tol) const {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("quantile level must lie in (0, 1)");
  double lo = kind_ == Kind::gaussian ? -40.0 : -radius_;
  double hi = -lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return hi;
}

// ------------------------------------------------------------- DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(std::vector<double> points, std::vector<double> weights) {
  if (points.empty()) throw ArgumentError("measure needs at least one atom");
  if (points.size() != weights.size()) throw DimensionError("points and weights differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i])) throw ArgumentError("measure support must be finite");
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw ArgumentError("weights must be nonnegative");
    if (i > 0 && points[i] < points[i - 1]) throw ArgumentError("measure support must be sorted");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("weights must sum to 1");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points_.empty() && points[i] == points_.back()) {
      weights_.back() += weights[i];
    } else {
      points_.push_back(points[i]);
      weights_.push_back(weights[i]);
    }
  }
}

DiscreteMeasure DiscreteMeasure::from_samples(std::vector<double> samples) {
  if (samples.empty()) throw ArgumentError("measure needs at least one atom");
  for (double v : samples) {
    if (!std::isfinite(v)) throw ArgumentError("measure support must be finite");
  }
  std::sort(samples.begin(), samples.end());
  std::vector<double> weights(samples.size(), 1.0 / static_cast<double>(samples.size()));
  return DiscreteMeasure(std::move(samples), std::move(weights));
}

DiscreteMeasure DiscreteMeasure::from_spectrum(const SpectralMeasure& measure) {
  const RealVector& ev = measure.eigenvalues();
  return from_samples(std::vector<double>(ev.begin(), ev.end()));
}

// ----------------------------------------------------------- PiecewiseLinearFn

PiecewiseLinearFn::PiecewiseLinearFn(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (breakpoints_.empty()) throw ArgumentError("piecewise-linear function needs a breakpoint");
  if (breakpoints_.size() != values_.size()) throw DimensionError("breakpoints and values differ in length");
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (!std::isfinite(breakpoints_[i]) || !std::isfinite(values_[i])) {
      throw ArgumentError("piecewise-linear data must be finite");
    }
    if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1])) {
      throw ArgumentError("breakpoints must be strictly increasing");
    }
  }
}

double PiecewiseLinearFn::operator()(double x) const {
  if (x <= breakpoints_.front()) return values_.front();
  if (x >= breakpoints_.back()) return values_.back();
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  const auto k = static_cast<std::size_t>(it - breakpoints_.begin());
  const double x0 = breakpoints_[k - 1];
  if (x == x0) return values_[k - 1];
  const double x1 = breakpoints_[k];
  return values_[k - 1] + (values_[k] - values_[k - 1]) * ((x - x0) / (x1 - x0));
}

double PiecewiseLinearFn::sup_norm() const {
  double out = 0.0;
  for (double v : values_) out = std::max(out, std::abs(v));
  return out;
}

double PiecewiseLinearFn::lipschitz() const {
  double out = 0.0;
  for (std::size_t i = 1; i < values_.size(); ++i) {
    out = std::max(out, std::abs(values_[i] - values_[i - 1]) / (breakpoints_[i] - breakpoints_[i - 1]));
  }
  return out;
}

bool PiecewiseLinearFn::in_g_class(double R, std::size_t m, double tol) const {
  if (!(R > 0.0) || m == 0) return false;
  if (std::abs((*this)(0.0)) > tol || bl_norm() > 1.0 + tol) return false;
  if (std::abs(values_.front()) > tol || std::abs(values_.back()) > tol) return false;
  const double step = 4.0 * R / static_cast<double>(m);
  for (double b : breakpoints_) {
    if (b < -2.0 * R - tol || b > 2.0 * R + tol) return false;
    const double k = (b + 2.0 * R) / step;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) return false;
  }
  return true;
}

PiecewiseLinearFn random_g_class_member(double R, std::size_t m, CounterRng& rng) {
  if (!(R > 0.0)) throw ArgumentError("class radius must be positive");
  if (m == 1) return PiecewiseLinearFn({-2.0 * R, 2.0 * R}, {0.0, 0.0});
  if (m == 0 || m % 2 != 0) throw ArgumentError("class grid needs an even number of pieces");
  const double h = 4.0 * R / static_cast<double>(m);
  std::vector<double> nodes(m + 1);
  for (std::size_t k = 0; k <= m; ++k) nodes[k] = -2.0 * R + h * static_cast<double>(k);
  nodes[m / 2] = 0.0;

  std::vector<double> values(m + 1);
  std::vector<double> slopes(m);
  const std::size_t half = m / 2;
  for (int attempt = 0;; ++attempt) {
    const double scale = rng.uniform();
    for (auto& s : slopes) s = scale * (2.0 * rng.uniform() - 1.0);
    for (std::size_t part = 0; part < 2; ++part) {
      double mean = 0.0;
      for (std::size_t k = part * half; k < (part + 1) * half; ++k) mean += slopes[k];
      mean /= static_cast<double>(half);
      for (std::size_t k = part * half; k < (part + 1) * half; ++k) slopes[k] -= mean;
    }
    values[0] = 0.0;
    for (std::size_t k = 0; k < m; ++k) values[k + 1] = values[k] + slopes[k] * h;
    values[half] = 0.0;
    values[m] = 0.0;
    PiecewiseLinearFn f(nodes, values);
    const double norm = f.bl_norm();
    if (norm <= 1.0) return f;
    if (attempt == 1000) {
      for (auto& v : values) v *= rng.uniform() / norm;
      return PiecewiseLinearFn(nodes, values);
    }
  }
}

// ------------------------------------------------------------------ distances

double w1_to_law(const DiscreteMeasure& measure, const ReferenceLaw& law, double crossing_tol) {
  const auto& x = measure.points();
  const auto& w = measure.weights();
  if (x.empty()) throw ArgumentError("measure needs at least one atom");
  auto A = [&](double v) { return law.cdf_antiderivative(v); };

  CompensatedSum total;
  total.add(A(x.front()));
  double level = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    level += w[k];
    const double a = x[k];
    const double b = x[k + 1];
    const double fa = law.cdf(a);
    const double fb = law.cdf(b);
    const double c = std::min(level, 1.0);
    if (fb <= c) {
      total.add(c * (b - a) - (A(b) - A(a)));
    } else if (fa >= c) {
      total.add((A(b) - A(a)) - c * (b - a));
    } else {
      double lo = a;
      double hi = b;
      while (hi - lo > crossing_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (law.cdf(mid) < c ? lo : hi) = mid;
      }
      const double xs = 0.5 * (lo + hi);
      const double as = A(xs);
      total.add(c * (xs - a) - (as - A(a)));
      total.add((A(b) - as) - c * (b - xs));
    }
  }
  total.add(law.upper_antiderivative(x.back()));
  return total.value();
}

double w1_to_law(const SpectralMeasure& measure, const ReferenceLaw& law) {
  return w1_to_law(DiscreteMeasure::from_spectrum(measure), law);
}

double w1_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const SignedSupport s = signed_difference(mu, nu);
  CompensatedSum total;
  double level = 0.0;
  for (std::size_t k = 0; k + 1 < s.points.size(); ++k) {
    level += s.weights[k];
    total.add(std::abs(level) * (s.points[k + 1] - s.points[k]));
  }
  return total.value();
}

double dbl_inner(std::span<const double> points, std::span<const double> signed_weights,
                 std::span<const double> bounds, double lip) {
  const std::size_t m = points.size();
  if (m != signed_weights.size() || m != bounds.size()) throw DimensionError("inner problem inputs differ in length");
  if (m == 0) return 0.0;
  if (!(lip >= 0.0)) throw ArgumentError("Lipschitz budget must be nonnegative");
  for (double b : bounds) {
    if (!(b >= 0.0)) throw ArgumentError("sup bounds must be nonnegative");
  }

  // Minimize -sum w_i f_i; record each stage's minimizing segment.
  ConvexPiecewise cost(bounds[0]);
  std::vector<double> seg_lo(m), seg_hi(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0) {
      cost.widen(lip * (points[i] - points[i - 1]));
      cost.restrict_to(bounds[i]);
    }
    cost.add_linear(-signed_weights[i]);
    seg_lo[i] = cost.left_end();
    seg_hi[i] = cost.right_end();
  }

  std::vector<double> f(m);
  f[m - 1] = std::clamp(0.0, seg_lo[m - 1], seg_hi[m - 1]);
  for (std::size_t i = m - 1; i-- > 0;) {
    const double d = lip * (points[i + 1] - points[i]);
    const double y = f[i + 1];
    f[i] = std::clamp(std::clamp(y, seg_lo[i], seg_hi[i]), y - d, y + d);
  }
  CompensatedSum value;
  for (std::size_t i = 0; i < m; ++i) value.add(signed_weights[i] * f[i]);
  return value.value();
}

double dbl_inner(std::span<const double> points, std::span<const double> signed_weights, double sup_bound,
                 double lip) {
  const std::vector<double> bounds(points.size(), sup_bound);
  return dbl_inner(points, signed_weights, bounds, lip);
}

double maximize_budget_split(const std::function<double(double)>& value_at, double tol) {
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0;
  double hi = 1.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = value_at(x1);
  double f2 = value_at(x2);
  double best = std::max({value_at(0.0), value_at(1.0), f1, f2});
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = value_at(x2);
      best = std::max(best, f2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = value_at(x1);
      best = std::max(best, f1);
    }
  }
  return best;
}

double dbl_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const DblOptions& options) {
  if (mu.size() == 0 || nu.size() == 0) throw ArgumentError("measures must be nonempty");
  const SignedSupport s = signed_difference(mu, nu);
  if (s.points.empty()) return 0.0;
  if (s.points.size() > 50000) throw SizeError("bounded-Lipschitz support limited to 5e4 points");
  if (options.dense_lp) return dbl_dense_lp(s);

  return maximize_budget_split(
      [&](double lip) { return dbl_inner(s.points, s.weights, 1.0 - lip, lip); }, options.tol);
}

DiscreteMeasure discretize(const ReferenceLaw& law, const GridSpec& grid) {
  if (!(grid.step > 0.0)) throw ArgumentError("grid step must be positive");
  if (grid.step > 0.05) throw ArgumentError("grid step must not exceed 0.05");
  const double lo = law.support_lo();
  const double hi = law.support_hi();
  const auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / grid.step - 1e-9));
  const double h = (hi - lo) / static_cast<double>(cells);
  std::vector<double> points(cells), weights(cells);
  double left = law.cdf(lo);
  for (std::size_t k = 0; k < cells; ++k) {
    const double a = lo + h * static_cast<double>(k);
    const double right = k + 1 == cells ? law.cdf(hi) : law.cdf(a + h);
    points[k] = a + 0.5 * h;
    weights[k] = right - left;
    left = right;
  }
  weights.front() += law.cdf(lo);
  weights.back() += 1.0 - law.cdf(hi);
  return DiscreteMeasure(std::move(points), std::move(weights));
}

DistanceWithSlack dbl_to_law(const DiscreteMeasure& measure, const ReferenceLaw& law, const GridSpec& grid) {
  const DiscreteMeasure cells = discretize(law, grid);
  const double lo = law.support_lo();
  const double hi = law.support_hi();
  const auto count = static_cast<double>(cells.size());
  const double h = (hi - lo) / count;
  const double tail = law.cdf(lo) + (1.0 - law.cdf(hi));
  return {dbl_discrete(measure, cells), 0.5 * h + 2.0 * tail};
}

DistanceWithSlack dbl_to_law(const SpectralMeasure& measure, const ReferenceLaw& law, const GridSpec& grid) {
  return dbl_to_law(DiscreteMeasure::from_spectrum(measure), law, grid);
}

// ------------------------------------------------------- truncation, smoothing

PiecewiseLinearFn truncate_bl(const PiecewiseLinearFn& f, double R) {
  if (!(R > 0.0)) throw ArgumentError("truncation radius must be positive");
  if (f.lipschitz() > 1.0 + 1e-9 || f.sup_norm() > 1.0 + 1e-12) {
    throw ContractError("truncation needs Lip(f) <= 1 and sup|f| <= 1");
  }
  if (std::abs(f(0.0)) > 1e-12) throw ContractError("truncation needs f(0) = 0");

  const double left = f(-R);
  const double right = f(R);
  std::vector<double> xs, vs;
  auto push = [&](double x, double v) {
    if (xs.empty() || x > xs.back()) {
      xs.push_back(x);
      vs.push_back(v);
    }
  };
  push(-R - std::abs(left), 0.0);
  push(-R, left);
  const auto& b = f.breakpoints();
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] > -R && b[i] < R) push(b[i], f.values()[i]);
  }
  push(R, right);
  push(R + std::abs(right), 0.0);
  return PiecewiseLinearFn(std::move(xs), std::move(vs));
}

double fejer_kernel(double lambda, double x) {
  if (!(lambda > 0.0)) throw ArgumentError("Fejer parameter must be positive");
  const double z = 0.5 * lambda * x;
  double ratio;
  if (std::abs(z) < 1e-4) {
    const double z2 = z * z;
    ratio = 1.0 - z2 / 3.0 + 2.0 * z2 * z2 / 45.0;
  } else {
    const double s = std::sin(z) / z;
    ratio = s * s;
  }
  return lambda / (2.0 * std::numbers::pi) * ratio;
}

double fejer_sup_bound(double lambda, double R) {
  return (8.0 * std::log(lambda) + 8.0 * std::log(2.0 * R) + 6.0) / (std::numbers::pi * lambda);
}

std::vector<double> fejer_convolve(const PiecewiseLinearFn& f, double lambda, std::span<const double> points) {
  if (!(lambda > 0.0)) throw ArgumentError("Fejer parameter must be positive");
  const double a = 0.5 * lambda;
  const double scale = 2.0 / (std::numbers::pi * lambda);
  const double half_mass = 0.5 * a * std::numbers::pi;
  const auto& s = f.breakpoints();
  const auto& v = f.values();
  const std::size_t nb = s.size();

  // S0(y) = int_0^y sin^2(a t)/t^2 dt, S1(y) = int_0^y sin^2(a t)/t dt.
  auto s0 = [a](double y) {
    if (y == 0.0) return 0.0;
    const double sn = std::sin(a * y);
    return a * special::sine_integral(2.0 * a * y) - sn * sn / y;
  };
  auto s1 = [a](double y) { return 0.5 * special::cin(2.0 * a * y); };

  std::vector<double> out(points.size());
  std::vector<double> y(nb), p0(nb), p1(nb);
  for (std::size_t q = 0; q < points.size(); ++q) {
    const double x = points[q];
    for (std::size_t k = 0; k < nb; ++k) {
      y[k] = x - s[k];
      p0[k] = s0(y[k]);
      p1[k] = s1(y[k]);
    }
    CompensatedSum sum;
    sum.add(v.front() * (half_mass - p0.front()));
    sum.add(v.back() * (p0.back() + half_mass));
    for (std::size_t k = 0; k + 1 < nb; ++k) {
      const double slope = (v[k + 1] - v[k]) / (s[k + 1] - s[k]);
      sum.add((v[k] + slope * y[k]) * (p0[k] - p0[k + 1]));
      sum.add(-slope * (p1[k] - p1[k + 1]));
    }
    out[q] = scale * sum.value();
  }
  return out;
}

std::vector<double> fejer_convolve_quadrature(const PiecewiseLinearFn& f, double lambda,
                                              std::span<const double> points) {
  if (!(lambda > 0.0)) throw ArgumentError("Fejer parameter must be positive");
  if (f.values().front() != 0.0 || f.values().back() != 0.0) {
    throw ArgumentError("quadrature convolution needs compact support");
  }
  static constexpr std::array<double, 5> kNodes = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                                   0.8650633666889845, 0.9739065285171717};
  static constexpr std::array<double, 5> kWeights = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                                     0.1494513491505806, 0.0666713443086881};
  const double lobe = 2.0 * std::numbers::pi / lambda;
  const auto& s = f.breakpoints();

  std::vector<double> out(points.size());
  std::vector<double> cuts;
  for (std::size_t q = 0; q < points.size(); ++q) {
    const double x = points[q];
    const double u_lo = x - s.back();
    const double u_hi = x - s.front();
    cuts.clear();
    for (double b : s) cuts.push_back(x - b);
    for (auto k = static_cast<long long>(std::ceil(u_lo / lobe)); k * lobe < u_hi; ++k) {
      cuts.push_back(static_cast<double>(k) * lobe);
    }
    std::sort(cuts.begin(), cuts.end());
    CompensatedSum sum;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = cuts[i + 1];
      if (!(b > a)) continue;
      const double mid = 0.5 * (a + b);
      const double half = 0.5 * (b - a);
      for (std::size_t k = 0; k < kNodes.size(); ++k) {
        for (double sign : {-1.0, 1.0}) {
          const double u = mid + sign * half * kNodes[k];
          sum.add(half * kWeights[k] * f(x - u) * fejer_kernel(lambda, u));
        }
      }
    }
    out[q] = sum.value();
  }
  return out;
}

// ---------------------------------------------------------------------- tails

double tail_mass(const DiscreteMeasure& measure, double t) {
  if (!(t > 0.0)) throw ArgumentError("tail threshold must be positive");
  double mass = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (std::abs(measure.points()[i]) > t) mass += measure.weights()[i];
  }
  return mass;
}

double tail_mass(const SpectralMeasure& measure, double t) {
  if (!(t > 0.0)) throw ArgumentError("tail threshold must be positive");
  std::size_t count = 0;
  for (double v : measure.eigenvalues()) count += std::abs(v) > t;
  return static_cast<double>(count) * measure.weight();
}

std::vector<TailCheck> tail_bound_check(std::span<const SpectralMeasure> replicas, std::span<const double> ts) {
  if (replicas.empty()) throw ArgumentError("tail check needs at least one replica");
  std::vector<TailCheck> out;
  const auto r = static_cast<double>(replicas.size());
  for (double t : ts) {
    std::vector<double> masses;
    masses.reserve(replicas.size());
    for (const auto& m : replicas) masses.push_back(tail_mass(m, t));
    const double mean = std::accumulate(masses.begin(), masses.end(), 0.0) / r;
    double ss = 0.0;
    for (double v : masses) ss += (v - mean) * (v - mean);
    const double se = replicas.size() > 1 ? std::sqrt(ss / (r - 1.0) / r) : 0.0;
    out.push_back({t, mean, se, t * t * mean});
  }
  return out;
}

}  // namespace qsg
