#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "esg/distributions.hpp"

namespace {

using esg::SymmetricDistribution;
constexpr double kPi = 3.14159265358979323846;

// Composite Simpson rule on [a, b] with n (even) panels; independent of the
// library's adaptive quadrature.
template <class Fn>
double simpson(Fn fn, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = fn(a) + fn(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * fn(a + i * h);
  return s * h / 3.0;
}

// Plain bisection against the CDF, used as the inverse oracle.
double bisection_inverse(const SymmetricDistribution& d, double x) {
  double lo = -50.0, hi = 50.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (d.cdf(mid) < x ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Kolmogorov-Smirnov statistic sqrt(n) D_n of a sample against a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return std::sqrt(n) * d;
}

// Asymptotic Kolmogorov critical value at alpha = 0.001.
constexpr double kKsCritical = 1.95;

TEST(Cdf, UniformExamples) {
  const auto u = SymmetricDistribution::uniform(0.5);
  EXPECT_DOUBLE_EQ(u.cdf(0.0), 0.5);
  EXPECT_DOUBLE_EQ(u.cdf(0.25), 0.75);
  EXPECT_DOUBLE_EQ(u.cdf(-0.5), 0.0);
  EXPECT_DOUBLE_EQ(u.cdf(3.0), 1.0);
}

TEST(Cdf, GaussianMixtureCenter) {
  EXPECT_DOUBLE_EQ(SymmetricDistribution::gaussian_mixture(kPi, 1.0).cdf(0.0), 0.5);
}

TEST(Cdf, TwoPointSteps) {
  const auto t = SymmetricDistribution::two_point(1.0);
  EXPECT_EQ(t.cdf(-1.5), 0.0);
  EXPECT_EQ(t.cdf(-1.0), 0.5);
  EXPECT_EQ(t.cdf(0.3), 0.5);
  EXPECT_EQ(t.cdf(1.0), 1.0);
  // Atomic symmetry: cdf(z) + cdf(-z^-) = 1.
  for (double z : {-2.0, -1.0, -0.4, 0.0, 0.7, 1.0, 3.0}) {
    const double left_limit = t.cdf(std::nextafter(-z, -INFINITY));
    EXPECT_DOUBLE_EQ(t.cdf(z) + left_limit, 1.0) << z;
  }
}

TEST(InvCdf, UniformExamples) {
  const auto u = SymmetricDistribution::uniform(0.5);
  EXPECT_DOUBLE_EQ(u.inv_cdf(0.5), 0.0);
  EXPECT_NEAR(u.inv_cdf(0.3), -0.2, 1e-15);
}

TEST(InvCdf, GaussianMixtureMatchesBisectionOracle) {
  const auto g = SymmetricDistribution::gaussian_mixture(kPi, 1.0);
  EXPECT_DOUBLE_EQ(g.inv_cdf(0.5), 0.0);
  for (double x : {0.001, 0.05, 0.25, 0.4, 0.6, 0.9, 0.999}) {
    EXPECT_NEAR(g.inv_cdf(x), bisection_inverse(g, x), 1e-10) << x;
  }
}

TEST(InvCdf, Errors) {
  EXPECT_THROW(SymmetricDistribution::two_point(1.0).inv_cdf(0.3), esg::NotInvertible);
  const auto u = SymmetricDistribution::uniform(0.5);
  EXPECT_THROW(u.inv_cdf(0.0), esg::DomainError);
  EXPECT_THROW(u.inv_cdf(1.0), esg::DomainError);
  EXPECT_THROW(u.inv_cdf(-0.2), esg::DomainError);
  EXPECT_THROW(SymmetricDistribution::gaussian_mixture(kPi, 1).inv_cdf(1.5), esg::DomainError);
}

TEST(InvCdf, StrictlyIncreasing) {
  for (const auto& d : {SymmetricDistribution::uniform(0.5), SymmetricDistribution::gaussian_mixture(kPi, 1.0)}) {
    double prev = -INFINITY;
    for (int i = 1; i < 100; ++i) {
      const double z = d.inv_cdf(i / 100.0);
      EXPECT_GT(z, prev);
      prev = z;
    }
  }
}

TEST(Density, Examples) {
  const auto u = SymmetricDistribution::uniform(0.5);
  EXPECT_DOUBLE_EQ(u.density(0.0), 1.0);
  EXPECT_DOUBLE_EQ(u.density(0.7), 0.0);
  const auto g = SymmetricDistribution::gaussian_mixture(kPi, 1.0);
  const double expected = (1.0 / (2.0 * std::sqrt(2.0 * kPi))) * (1.0 + std::exp(-2.0 * kPi * kPi));
  EXPECT_NEAR(g.density(kPi), expected, 1e-15);
  EXPECT_THROW(SymmetricDistribution::two_point(1.0).density(0.0), esg::NoDensity);
}

TEST(Density, IntegratesToOne) {
  const auto u = SymmetricDistribution::uniform(0.5);
  EXPECT_NEAR(simpson([&](double z) { return u.density(z); }, -0.5, 0.5, 2000), 1.0, 1e-8);
  const auto g = SymmetricDistribution::gaussian_mixture(kPi, 1.0);
  EXPECT_NEAR(simpson([&](double z) { return g.density(z); }, -kPi - 14, kPi + 14, 20000), 1.0, 1e-8);
}

TEST(Invariants, RoundTrip) {
  const auto u = SymmetricDistribution::uniform(0.5);
  const auto g = SymmetricDistribution::gaussian_mixture(kPi, 1.0);
  for (int i = 1; i <= 99; ++i) {
    const double x = i / 100.0;
    EXPECT_NEAR(u.cdf(u.inv_cdf(x)), x, 1e-12);
    EXPECT_NEAR(g.cdf(g.inv_cdf(x)), x, 1e-8);
  }
  for (double z : {-0.4, -0.1, 0.0, 0.2, 0.45}) EXPECT_NEAR(u.inv_cdf(u.cdf(z)), z, 1e-12);
  for (double z : {-5.0, -1.0, 0.3, 2.0, 6.0}) EXPECT_NEAR(g.inv_cdf(g.cdf(z)), z, 1e-9);
}

TEST(Invariants, Symmetry) {
  const auto u = SymmetricDistribution::uniform(0.5);
  const auto g = SymmetricDistribution::gaussian_mixture(kPi, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double zu = -0.6 + 1.2 * i / 199.0;
    EXPECT_NEAR(u.cdf(zu) + u.cdf(-zu), 1.0, 1e-12);
    const double zg = -12.0 + 24.0 * i / 199.0;
    EXPECT_NEAR(g.cdf(zg) + g.cdf(-zg), 1.0, 1e-12);
  }
}

TEST(Invariants, CdfMonotoneWithLimits) {
  for (const auto& d : {SymmetricDistribution::uniform(0.5), SymmetricDistribution::two_point(1.0),
                        SymmetricDistribution::gaussian_mixture(kPi, 1.0)}) {
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double z = -20.0 + 40.0 * i / 400.0;
      const double c = d.cdf(z);
      EXPECT_GE(c, prev);
      prev = c;
    }
    EXPECT_NEAR(d.cdf(-1e3), 0.0, 1e-300);
    EXPECT_DOUBLE_EQ(d.cdf(1e3), 1.0);
  }
}

TEST(Sample, SupportChecks) {
  esg::Stream rng(11);
  const auto t = SymmetricDistribution::two_point(1.0);
  const auto u = SymmetricDistribution::uniform(0.5);
  for (int i = 0; i < 100000; ++i) {
    const double a = t.sample(rng);
    EXPECT_TRUE(a == 1.0 || a == -1.0);
    const double b = u.sample(rng);
    EXPECT_TRUE(b >= -0.5 && b <= 0.5);
  }
}

TEST(Sample, GaussianMixtureMean) {
  esg::Stream rng(12);
  const auto g = SymmetricDistribution::gaussian_mixture(kPi, 1.0);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += g.sample(rng);
  const double se = std::sqrt((kPi * kPi + 1.0) / n);
  EXPECT_LE(std::abs(sum / n), 4.0 * se);
}

TEST(Sample, KolmogorovSmirnov) {
  esg::Stream rng(13);
  for (const auto& d : {SymmetricDistribution::uniform(0.5), SymmetricDistribution::gaussian_mixture(kPi, 1.0),
                        SymmetricDistribution::uniform(2.0)}) {
    std::vector<double> xs(20000);
    for (auto& x : xs) x = d.sample(rng);
    EXPECT_LT(ks_statistic(xs, [&](double z) { return d.cdf(z); }), kKsCritical) << d.name();
  }
  // Two-point: frequency of +1.
  const auto t = SymmetricDistribution::two_point(1.0);
  const int n = 1000000;
  int plus = 0;
  for (int i = 0; i < n; ++i) plus += t.sample(rng) > 0 ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(plus) / n, 0.5, 4.0 * std::sqrt(0.25 / n));
}

TEST(CalibratedKey, Examples) {
  esg::Stream rng(14);
  const int n = 1000000;
  const auto u = SymmetricDistribution::uniform(0.5);
  const auto g = SymmetricDistribution::gaussian_mixture(kPi, 1.0);
  EXPECT_NEAR(esg::check_calibrated_key(u, 0.5, n, rng), 0.5, 4 * std::sqrt(0.25 / n));
  EXPECT_NEAR(esg::check_calibrated_key(g, 0.5, n, rng), 0.5, 4 * std::sqrt(0.25 / n));
  EXPECT_NEAR(esg::check_calibrated_key(u, 0.9, n, rng), 0.9, 4 * std::sqrt(0.09 / n));
  EXPECT_NEAR(esg::check_calibrated_key(g, 0.25, n, rng), 0.25, 4 * std::sqrt(0.25 * 0.75 / n));
  EXPECT_THROW(esg::check_calibrated_key(SymmetricDistribution::two_point(1), 0.3, 10, rng), esg::NotInvertible);
}

TEST(Parse, CaseInsensitiveNames) {
  EXPECT_EQ(esg::parse_distribution("Uniform(0.5)"), SymmetricDistribution::uniform(0.5));
  EXPECT_EQ(esg::parse_distribution(" TWOPOINT( 1 ) "), SymmetricDistribution::two_point(1.0));
  EXPECT_EQ(esg::parse_distribution("BiGauss(3.14159265358979323846, 1)"),
            SymmetricDistribution::gaussian_mixture(kPi, 1.0));
  EXPECT_THROW(esg::parse_distribution("uniform(-1)"), esg::ConfigError);
  EXPECT_THROW(esg::parse_distribution("bigauss(1)"), esg::ConfigError);
  EXPECT_THROW(esg::parse_distribution("cauchy(1)"), esg::ConfigError);
  EXPECT_THROW(esg::parse_distribution("uniform"), esg::ConfigError);
}

}  // namespace
