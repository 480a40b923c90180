#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "esg/error.hpp"

namespace esg::numerics {

inline constexpr double kPi = 3.14159265358979323846;

/// Adaptive Gauss-Kronrod (7/15) integral of `fn` over [a, b], split at every
/// breakpoint strictly inside the interval. Breakpoints should mark kinks of
/// the integrand; the adaptive rule then only sees smooth pieces.
template <class Fn>
double integrate(Fn&& fn, double a, double b, std::span<const double> breakpoints = {},
                 double tol = 1e-13) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double p : breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  // A coarse pass gives each piece's share of the total L1 norm; pieces are
  // then refined to a common absolute tolerance tol * L1.
  std::vector<double> l1(cuts.size() - 1);
  double l1_total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    Rule::integrate(fn, cuts[i], cuts[i + 1], 0, 0.0, &err, &l1[i]);
    l1_total += l1[i];
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double piece_tol = l1[i] > 0.0 ? std::max(tol, tol * l1_total / l1[i]) : tol;
    total += Rule::integrate(fn, cuts[i], cuts[i + 1], 15, std::min(piece_tol, 1e-3));
  }
  return total;
}

/// Root of a nondecreasing function on [lo, hi] by bisection.
/// Requires fn(lo) <= target <= fn(hi).
template <class Fn>
double bisect_increasing(Fn&& fn, double target, double lo, double hi, double z_tol,
                         int max_iter = 200) {
  for (int it = 0; it < max_iter && hi - lo > z_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fn(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Safeguarded Newton iteration for an increasing function with known
/// derivative on a bracketing interval. Falls back to bisection whenever the
/// Newton step leaves the bracket. Converges to full double precision.
template <class Fn, class Deriv>
double solve_increasing(Fn&& fn, Deriv&& deriv, double target, double lo, double hi,
                        int max_iter = 200) {
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    const double r = fn(z) - target;
    if (r == 0.0) return z;
    if (r < 0.0)
      lo = z;
    else
      hi = z;
    const double d = deriv(z);
    double next = (d > 0.0) ? z - r / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - z) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(z)))
      return next;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(z)))
      return next;
    z = next;
  }
  return z;
}

/// Piecewise cubic Hermite interpolant of a nondecreasing function on an
/// equispaced grid, built from sampled values and slopes.
///
/// Slopes are limited (Fritsch-Carlson) so that the interpolant is monotone
/// on every segment. The interpolant is C1 and its derivative is exposed so
/// that callers can use it as a consistent density.
class MonotoneHermite {
 public:
  MonotoneHermite() = default;

  MonotoneHermite(double z0, double z1, std::vector<double> values, std::vector<double> slopes)
      : z0_(z0), z1_(z1), values_(std::move(values)), slopes_(std::move(slopes)) {
    if (values_.size() < 2 || values_.size() != slopes_.size() || !(z1_ > z0_))
      throw ConstructionError("MonotoneHermite: need >= 2 nodes with matching slopes");
    step_ = (z1_ - z0_) / static_cast<double>(values_.size() - 1);
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
      const double delta = (values_[i + 1] - values_[i]) / step_;
      if (delta < 0.0)
        throw ConstructionError("MonotoneHermite: tabulated values are not monotone");
      if (slopes_[i] < 0.0) slopes_[i] = 0.0;
      if (delta == 0.0) {
        slopes_[i] = slopes_[i + 1] = 0.0;
        continue;
      }
      const double a = slopes_[i] / delta;
      const double b = slopes_[i + 1] / delta;
      const double s = a * a + b * b;
      if (s > 9.0) {
        const double tau = 3.0 / std::sqrt(s);
        slopes_[i] = tau * a * delta;
        slopes_[i + 1] = tau * b * delta;
      }
    }
    if (slopes_.back() < 0.0) slopes_.back() = 0.0;
  }

  double lower() const { return z0_; }
  double upper() const { return z1_; }
  std::span<const double> values() const { return values_; }
  bool contains(double z) const { return z >= z0_ && z <= z1_; }

  double value(double z) const {
    const auto [i, t] = locate(z);
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * values_[i] + h10 * step_ * slopes_[i] + h01 * values_[i + 1] +
           h11 * step_ * slopes_[i + 1];
  }

  double derivative(double z) const {
    const auto [i, t] = locate(z);
    const double t2 = t * t;
    const double d00 = 6 * t2 - 6 * t, d10 = 3 * t2 - 4 * t + 1;
    const double d01 = -6 * t2 + 6 * t, d11 = 3 * t2 - 2 * t;
    return (d00 * values_[i] + d01 * values_[i + 1]) / step_ + d10 * slopes_[i] +
           d11 * slopes_[i + 1];
  }

  /// Inverse of value() for y within [values.front(), values.back()].
  double inverse(double y) const {
    auto it = std::upper_bound(values_.begin(), values_.end(), y);
    std::size_t hi = static_cast<std::size_t>(it - values_.begin());
    hi = std::clamp<std::size_t>(hi, 1, values_.size() - 1);
    std::size_t lo = hi - 1;
    // Skip flat runs so the bracket holds a strict increase.
    while (lo > 0 && values_[lo] > y) --lo;
    const double a = z0_ + step_ * static_cast<double>(lo);
    const double b = z0_ + step_ * static_cast<double>(hi);
    return solve_increasing([this](double z) { return value(z); },
                            [this](double z) { return derivative(z); }, y, a, b);
  }

 private:
  std::pair<std::size_t, double> locate(double z) const {
    const double u = (std::clamp(z, z0_, z1_) - z0_) / step_;
    std::size_t i = static_cast<std::size_t>(u);
    if (i >= values_.size() - 1) i = values_.size() - 2;
    return {i, u - static_cast<double>(i)};
  }

  double z0_ = 0.0;
  double z1_ = 1.0;
  double step_ = 1.0;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

}  // namespace esg::numerics
