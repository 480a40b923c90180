#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "esg/error.hpp"
#include "esg/oracles.hpp"

namespace esg {

inline constexpr std::size_t kMaxEnumerationDimension = 25;

namespace detail {

inline void require_enumerable(std::size_t d) {
  if (d == 0) throw DomainError("enumeration needs d >= 1");
  if (d > kMaxEnumerationDimension)
    throw DimensionTooLarge("exact enumeration limited to d <= " + std::to_string(kMaxEnumerationDimension) +
                            " (got " + std::to_string(d) + ")");
}

inline void require_closed_box(std::span<const double> x) {
  for (double xi : x)
    if (!(xi >= 0.0 && xi <= 1.0)) throw DomainError("probability vector must lie in [0, 1]^d");
}

}  // namespace detail

/// v(x; Q) = sum_y Q(y) prod_i P(y_i | x_i), enumerating all 2^d vertices.
template <PointOracle O>
double multilinear_value(std::span<const double> x, const O& oracle) {
  const std::size_t d = x.size();
  detail::require_enumerable(d);
  if (oracle.dimension() != d) throw DimensionMismatch("multilinear_value: dimension mismatch");
  detail::require_closed_box(x);
  double total = 0.0;
  BinaryVector y(d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      y[i] = static_cast<Bit>((mask >> i) & 1U);
      w *= y[i] ? x[i] : 1.0 - x[i];
    }
    total += w * oracle.query(y);
  }
  return total;
}

/// Component i is v(x | x_i = 1) - v(x | x_i = 0). One pass over the
/// vertices; each vertex contributes +/- Q(y) times the product of the other
/// coordinates' probabilities.
template <PointOracle O>
std::vector<double> multilinear_gradient(std::span<const double> x, const O& oracle) {
  const std::size_t d = x.size();
  detail::require_enumerable(d);
  if (oracle.dimension() != d) throw DimensionMismatch("multilinear_gradient: dimension mismatch");
  detail::require_closed_box(x);
  std::vector<double> grad(d, 0.0), prefix(d + 1), suffix(d + 1);
  BinaryVector y(d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    for (std::size_t i = 0; i < d; ++i) y[i] = static_cast<Bit>((mask >> i) & 1U);
    prefix[0] = 1.0;
    for (std::size_t i = 0; i < d; ++i) prefix[i + 1] = prefix[i] * (y[i] ? x[i] : 1.0 - x[i]);
    suffix[d] = 1.0;
    for (std::size_t i = d; i-- > 0;) suffix[i] = suffix[i + 1] * (y[i] ? x[i] : 1.0 - x[i]);
    const double q = oracle.query(y);
    for (std::size_t i = 0; i < d; ++i) {
      const double others = prefix[i] * suffix[i + 1];
      grad[i] += (y[i] ? q : -q) * others;
    }
  }
  return grad;
}

/// Central differences of multilinear_value. Exact up to rounding because v
/// is affine in each coordinate.
template <PointOracle O>
std::vector<double> finite_difference_gradient(std::span<const double> x, const O& oracle, double h) {
  if (!(h > 0.0)) throw DomainError("finite difference step must be positive");
  std::vector<double> grad(x.size());
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] - h < 0.0 || x[i] + h > 1.0)
      throw DomainError("finite difference probe leaves [0, 1] in coordinate " + std::to_string(i));
    probe[i] = x[i] + h;
    const double up = multilinear_value(probe, oracle);
    probe[i] = x[i] - h;
    const double down = multilinear_value(probe, oracle);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace esg
