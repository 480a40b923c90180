#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "esg/distributions.hpp"
#include "esg/error.hpp"
#include "esg/numerics.hpp"
#include "esg/random.hpp"

namespace esg {

/// The encoding distribution of a good tuple: a symmetric CDF with a density
/// that is positive on the interior of its support, so that the embedding
/// x -> inv_cdf(x) is a smooth bijection from (0, 1).
class Encoding {
 public:
  virtual ~Encoding() = default;
  virtual double cdf(double z) const = 0;
  virtual double inv_cdf(double x) const = 0;
  virtual double density(double z) const = 0;
  /// Closure of the support; infinite endpoints allowed.
  virtual std::pair<double, double> support() const = 0;
  virtual std::string name() const = 0;

 protected:
  static void require_probability(double x) {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("encoding inverse needs x in (0, 1)");
  }
};

/// Encoding backed by a well-invertible SymmetricDistribution.
class DistributionEncoding final : public Encoding {
 public:
  explicit DistributionEncoding(SymmetricDistribution d) : dist_(d) {
    if (!dist_.well_invertible())
      throw NotInvertible("an encoding distribution must be well-invertible");
  }
  double cdf(double z) const override { return dist_.cdf(z); }
  double inv_cdf(double x) const override { return dist_.inv_cdf(x); }
  double density(double z) const override { return dist_.density(z); }
  std::pair<double, double> support() const override { return dist_.support(); }
  std::string name() const override { return dist_.name(); }

 private:
  SymmetricDistribution dist_;
};

/// Piecewise-quadratic CDF on [-1/2, 1/2] paired with the spike function.
class SpikeEncoding final : public Encoding {
 public:
  double cdf(double z) const override {
    if (z <= -0.5) return 0.0;
    if (z >= 0.5) return 1.0;
    const double r = 0.5 - std::abs(z);
    return z <= 0.0 ? 2.0 * r * r : 1.0 - 2.0 * r * r;
  }
  double inv_cdf(double x) const override {
    require_probability(x);
    return x <= 0.5 ? std::sqrt(0.5 * x) - 0.5 : 0.5 - std::sqrt(0.5 * (1.0 - x));
  }
  double density(double z) const override {
    return std::abs(z) <= 0.5 ? 4.0 * (0.5 - std::abs(z)) : 0.0;
  }
  std::pair<double, double> support() const override { return {-0.5, 0.5}; }
  std::string name() const override { return "spike"; }
};

/// (1 + sin(pi z)) / 2 on [-1/2, 1/2].
class ArchEncoding final : public Encoding {
 public:
  double cdf(double z) const override {
    if (z <= -0.5) return 0.0;
    if (z >= 0.5) return 1.0;
    return 0.5 * (1.0 + std::sin(numerics::kPi * z));
  }
  double inv_cdf(double x) const override {
    require_probability(x);
    return std::asin(2.0 * x - 1.0) / numerics::kPi;
  }
  double density(double z) const override {
    return std::abs(z) <= 0.5 ? 0.5 * numerics::kPi * std::cos(numerics::kPi * z) : 0.0;
  }
  std::pair<double, double> support() const override { return {-0.5, 0.5}; }
  std::string name() const override { return "arch"; }
};

/// z + 1/2 + sin(2 pi z) / (2 pi) on [-1/2, 1/2]; inverted numerically.
class CosineEncoding final : public Encoding {
 public:
  double cdf(double z) const override {
    if (z <= -0.5) return 0.0;
    if (z >= 0.5) return 1.0;
    return z + 0.5 + std::sin(2.0 * numerics::kPi * z) / (2.0 * numerics::kPi);
  }
  double inv_cdf(double x) const override {
    require_probability(x);
    if (x == 0.5) return 0.0;
    return numerics::solve_increasing([this](double z) { return cdf(z); },
                                      [this](double z) { return density(z); }, x, -0.5, 0.5);
  }
  double density(double z) const override {
    return std::abs(z) <= 0.5 ? 1.0 + std::cos(2.0 * numerics::kPi * z) : 0.0;
  }
  std::pair<double, double> support() const override { return {-0.5, 0.5}; }
  std::string name() const override { return "cosine"; }
};

/// Encoding defined implicitly as the smoothed main function
/// F(z) = E[f(z + eps)], eps ~ noise, with f(u) = 0 for u <= 0.
///
/// F is tabulated with its derivative on an equispaced grid over
/// [-half_range, 0] and interpolated by a monotone cubic Hermite spline; the
/// positive half follows from F(z) + F(-z) = 1. The density reported is the
/// derivative of the interpolant, so cdf/density/inv_cdf stay mutually
/// consistent. Beyond the grid both are evaluated by direct quadrature.
class TabulatedEncoding final : public Encoding {
 public:
  TabulatedEncoding(std::string label, std::function<double(double)> f,
                    std::function<double(double)> f_prime, SymmetricDistribution noise,
                    double half_range, std::size_t nodes)
      : label_(std::move(label)), f_(std::move(f)), f_prime_(std::move(f_prime)), noise_(noise) {
    if (!noise_.well_invertible()) throw ConstructionError("tabulated encoding needs a noise density");
    if (nodes < 2) throw ConstructionError("tabulated encoding needs at least two nodes");
    const double step = half_range / static_cast<double>(nodes - 1);
    std::vector<double> values(nodes), slopes(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
      const double z = -half_range + step * static_cast<double>(j);
      values[j] = smoothed(f_, z);
      slopes[j] = smoothed(f_prime_, z);
    }
    values.back() = 0.5;
    for (std::size_t j = 0; j + 1 < nodes; ++j) {
      if (!(values[j + 1] > values[j]))
        throw ConstructionError(label_ + ": tabulated encoding is not strictly increasing near z = " +
                                std::to_string(-half_range + step * static_cast<double>(j)));
    }
    table_ = numerics::MonotoneHermite(-half_range, 0.0, std::move(values), std::move(slopes));
  }

  double cdf(double z) const override {
    if (z > 0.0) return 1.0 - cdf(-z);
    if (table_.contains(z)) return table_.value(z);
    return smoothed(f_, z);
  }

  double density(double z) const override {
    const double a = -std::abs(z);
    if (table_.contains(a)) return table_.derivative(a);
    return smoothed(f_prime_, a);
  }

  double inv_cdf(double x) const override {
    require_probability(x);
    if (x > 0.5) return -inv_cdf(1.0 - x);
    if (x >= table_.values().front()) return table_.inverse(x);
    double lo = 2.0 * table_.lower();
    while (smoothed(f_, lo) > x) lo *= 2.0;
    return numerics::bisect_increasing([this](double z) { return smoothed(f_, z); }, x, lo,
                                       table_.lower(), 1e-13);
  }

  std::pair<double, double> support() const override {
    const double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
  }
  std::string name() const override { return label_; }

  /// E[g(z + eps)] restricted to z + eps > 0, by adaptive quadrature.
  double smoothed(const std::function<double(double)>& g, double z) const {
    const auto [lo_s, hi_s] = noise_.support();
    const auto* mix = std::get_if<GaussianMixture>(&noise_.kind());
    const double reach = mix ? mix->center + 14.0 * mix->std : hi_s;
    const double a = std::max(-z, std::isfinite(lo_s) ? lo_s : -reach);
    const double b = std::isfinite(hi_s) ? hi_s : reach;
    if (!(b > a)) return 0.0;
    std::vector<double> cuts{-z};
    if (mix) {
      for (double c : {mix->center, -mix->center})
        if (std::abs(c + z) > 1e-2 * mix->std) cuts.push_back(c);
    }
    return numerics::integrate([&](double t) { return g(z + t) * noise_.density(t); }, a, b, cuts);
  }

 private:
  std::string label_;
  std::function<double(double)> f_;
  std::function<double(double)> f_prime_;
  SymmetricDistribution noise_;
  numerics::MonotoneHermite table_;
};

/// A good tuple (f, sigma, sigma_hat): main function f vanishing on the
/// nonpositive reals, symmetric noise sigma, and an encoding sigma_hat such
/// that E_{eps ~ sigma}[f(sigma_hat^{-1}(x) + eps)] = x on (0, 1).
struct GoodTuple {
  std::string name;
  std::function<double(double)> f;
  /// Derivative of f; 0 on z <= 0 and at every point listed in `kinks`.
  std::function<double(double)> f_prime;
  SymmetricDistribution sigma;
  std::shared_ptr<const Encoding> sigma_hat;
  /// Nonnegative points where f' is discontinuous.
  std::vector<double> kinks;
};

inline GoodTuple make_spike() {
  GoodTuple t;
  t.name = "spike";
  t.f = [](double z) {
    if (z <= 0.0 || z >= 1.0) return 0.0;
    return z <= 0.5 ? 4.0 * z : 4.0 * (1.0 - z);
  };
  t.f_prime = [](double z) {
    if (z <= 0.0 || z >= 1.0 || z == 0.5) return 0.0;
    return z < 0.5 ? 4.0 : -4.0;
  };
  t.sigma = SymmetricDistribution::uniform(0.5);
  t.sigma_hat = std::make_shared<SpikeEncoding>();
  t.kinks = {0.0, 0.5, 1.0};
  return t;
}

inline GoodTuple make_arch() {
  using numerics::kPi;
  GoodTuple t;
  t.name = "arch";
  t.f = [](double z) { return (z <= 0.0 || z >= 1.0) ? 0.0 : 0.5 * kPi * std::sin(kPi * z); };
  t.f_prime = [](double z) {
    return (z <= 0.0 || z >= 1.0) ? 0.0 : 0.5 * kPi * kPi * std::cos(kPi * z);
  };
  t.sigma = SymmetricDistribution::uniform(0.5);
  t.sigma_hat = std::make_shared<ArchEncoding>();
  t.kinks = {0.0, 1.0};
  return t;
}

inline GoodTuple make_cosine() {
  using numerics::kPi;
  GoodTuple t;
  t.name = "cosine";
  t.f = [](double z) { return (z <= 0.0 || z >= 1.0) ? 0.0 : 1.0 - std::cos(2.0 * kPi * z); };
  t.f_prime = [](double z) {
    return (z <= 0.0 || z >= 1.0) ? 0.0 : 2.0 * kPi * std::sin(2.0 * kPi * z);
  };
  t.sigma = SymmetricDistribution::uniform(0.5);
  t.sigma_hat = std::make_shared<CosineEncoding>();
  return t;
}

inline GoodTuple make_longjump() {
  GoodTuple t;
  t.name = "longjump";
  t.f = [](double z) { return std::max(0.0, 2.0 * z - 1.0); };
  t.f_prime = [](double z) { return z > 0.5 ? 2.0 : 0.0; };
  t.sigma = SymmetricDistribution::two_point(1.0);
  t.sigma_hat = std::make_shared<DistributionEncoding>(SymmetricDistribution::uniform(0.5));
  t.kinks = {0.5};
  return t;
}

inline GoodTuple make_bigauss_cosine() {
  GoodTuple t;
  t.name = "bigauss_cosine";
  t.f = [](double z) { return z <= 0.0 ? 0.0 : 1.0 - std::cos(0.5 * z); };
  t.f_prime = [](double z) { return z <= 0.0 ? 0.0 : 0.5 * std::sin(0.5 * z); };
  t.sigma = SymmetricDistribution::gaussian_mixture(numerics::kPi, 1.0);
  // The table is immutable and costly to build; share one instance.
  static const std::shared_ptr<const Encoding> encoding = std::make_shared<TabulatedEncoding>(
      "bigauss_cosine", t.f, t.f_prime, t.sigma, numerics::kPi + 8.0, 2049);
  t.sigma_hat = encoding;
  return t;
}

inline const std::vector<std::string>& tuple_names() {
  static const std::vector<std::string> names{"spike", "arch", "cosine", "bigauss_cosine", "longjump"};
  return names;
}

inline GoodTuple make_tuple(std::string_view name) {
  const std::string n = detail::lowercase(detail::trim(name));
  if (n == "spike") return make_spike();
  if (n == "arch") return make_arch();
  if (n == "cosine") return make_cosine();
  if (n == "bigauss_cosine") return make_bigauss_cosine();
  if (n == "longjump") return make_longjump();
  throw ConfigError("unknown tuple '" + std::string(name) + "'");
}

/// E_{eps ~ sigma}[f(e + eps)]: exact two-point average for atomic noise,
/// adaptive quadrature against the noise density otherwise.
inline double smoothed_main_function(const GoodTuple& t, double e) {
  if (auto* tp = std::get_if<TwoPoint>(&t.sigma.kind()))
    return 0.5 * (t.f(e + tp->magnitude) + t.f(e - tp->magnitude));
  if (!t.sigma.well_invertible()) throw NoDensity(t.name + ": noise has no density");

  auto [a, b] = t.sigma.support();
  std::vector<double> cuts{-e};
  for (double k : t.kinks) cuts.push_back(k - e);
  if (auto* g = std::get_if<GaussianMixture>(&t.sigma.kind())) {
    a = -g->center - 14.0 * g->std;
    b = -a;
    cuts.push_back(g->center);
    cuts.push_back(-g->center);
  }
  // f vanishes below zero, so start the integral at -e when that is inside.
  a = std::max(a, -e);
  return numerics::integrate([&](double u) { return t.f(e + u) * t.sigma.density(u); }, a, b, cuts);
}

enum class ValidationMethod { quadrature, monte_carlo };

struct ValidationPoint {
  double x = 0.0;
  double expectation = 0.0;
  double residual = 0.0;
  /// Monte Carlo standard error; 0 for quadrature.
  double std_err = 0.0;
};

struct ValidationReport {
  double max_residual = 0.0;
  std::vector<ValidationPoint> per_x;

  /// Quadrature: every residual <= tol. Monte Carlo: every residual within
  /// `sigmas` standard errors.
  bool passed(double tol = 1e-6, double sigmas = 4.0) const {
    return std::all_of(per_x.begin(), per_x.end(), [&](const ValidationPoint& p) {
      return p.std_err > 0.0 ? p.residual <= sigmas * p.std_err : p.residual <= tol;
    });
  }
};

/// Checks the calibration identity E[f(sigma_hat^{-1}(x) + eps)] = x on a grid.
inline ValidationReport validate_tuple(const GoodTuple& t, std::span<const double> grid,
                                       ValidationMethod method = ValidationMethod::quadrature,
                                       std::uint64_t n_samples = 0, Stream* rng = nullptr) {
  ValidationReport report;
  for (double x : grid) {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("validate_tuple: grid points must lie in (0, 1)");
    const double e = t.sigma_hat->inv_cdf(x);
    ValidationPoint p{x, 0.0, 0.0, 0.0};
    if (method == ValidationMethod::quadrature) {
      p.expectation = smoothed_main_function(t, e);
    } else {
      if (rng == nullptr || n_samples < 2)
        throw DomainError("validate_tuple: Monte Carlo needs a stream and >= 2 samples");
      double mean = 0.0, m2 = 0.0;
      for (std::uint64_t i = 0; i < n_samples; ++i) {
        const double v = t.f(e + t.sigma.sample(*rng));
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
      }
      p.expectation = mean;
      p.std_err = std::sqrt(m2 / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples));
    }
    p.residual = std::abs(p.expectation - x);
    report.max_residual = std::max(report.max_residual, p.residual);
    report.per_x.push_back(p);
  }
  return report;
}

/// Max over z of |(f * sigma')(z) - sigma_hat(z)|.
inline double convolution_check(const GoodTuple& t, std::span<const double> z_grid) {
  if (t.sigma.is_atomic()) throw NoDensity(t.name + ": convolution needs a noise density");
  double worst = 0.0;
  for (double z : z_grid)
    worst = std::max(worst, std::abs(smoothed_main_function(t, z) - t.sigma_hat->cdf(z)));
  return worst;
}

/// {step, 2 step, ..., 1 - step} with step = 1 / (n + 1).
inline std::vector<double> probability_grid(std::size_t n = 99) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<double>(i + 1) / static_cast<double>(n + 1);
  return g;
}

}  // namespace esg
