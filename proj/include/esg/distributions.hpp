#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "esg/error.hpp"
#include "esg/numerics.hpp"
#include "esg/random.hpp"

namespace esg {

/// Unif[-half_width, half_width].
struct UniformInterval {
  double half_width = 0.5;
};

/// Unif{-magnitude, +magnitude}.
struct TwoPoint {
  double magnitude = 1.0;
};

/// 1/2 N(center, std^2) + 1/2 N(-center, std^2).
struct GaussianMixture {
  double center = numerics::kPi;
  double std = 1.0;
};

/// A one-dimensional distribution symmetric about zero.
///
/// UniformInterval and GaussianMixture are well-invertible: their CDF is a
/// bijection from the interior of the support onto (0, 1). TwoPoint is atomic
/// and rejects every operation that needs an inverse or a density.
class SymmetricDistribution {
 public:
  using Kind = std::variant<UniformInterval, TwoPoint, GaussianMixture>;

  SymmetricDistribution() : kind_(UniformInterval{}) {}

  static SymmetricDistribution uniform(double half_width) {
    if (!(half_width > 0.0)) throw DomainError("uniform: half width must be positive");
    return SymmetricDistribution(UniformInterval{half_width});
  }
  static SymmetricDistribution two_point(double magnitude) {
    if (!(magnitude > 0.0)) throw DomainError("twopoint: magnitude must be positive");
    return SymmetricDistribution(TwoPoint{magnitude});
  }
  static SymmetricDistribution gaussian_mixture(double center, double std) {
    if (!(center > 0.0) || !(std > 0.0))
      throw DomainError("bigauss: center and std must be positive");
    return SymmetricDistribution(GaussianMixture{center, std});
  }

  const Kind& kind() const { return kind_; }

  bool is_atomic() const { return std::holds_alternative<TwoPoint>(kind_); }
  bool well_invertible() const { return !is_atomic(); }

  /// Interval outside of which the distribution carries no mass (infinite for
  /// the Gaussian mixture).
  std::pair<double, double> support() const {
    if (auto* u = std::get_if<UniformInterval>(&kind_)) return {-u->half_width, u->half_width};
    if (auto* t = std::get_if<TwoPoint>(&kind_)) return {-t->magnitude, t->magnitude};
    const double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
  }

  /// P[eps <= z].
  double cdf(double z) const {
    if (auto* u = std::get_if<UniformInterval>(&kind_)) {
      const double c = u->half_width;
      if (z <= -c) return 0.0;
      if (z >= c) return 1.0;
      return (z + c) / (2.0 * c);
    }
    if (auto* t = std::get_if<TwoPoint>(&kind_)) {
      if (z < -t->magnitude) return 0.0;
      if (z < t->magnitude) return 0.5;
      return 1.0;
    }
    const auto& g = std::get<GaussianMixture>(kind_);
    return 0.5 * (normal_cdf((z - g.center) / g.std) + normal_cdf((z + g.center) / g.std));
  }

  double inv_cdf(double x) const {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("inv_cdf: argument must lie in (0, 1)");
    if (auto* u = std::get_if<UniformInterval>(&kind_)) return (2.0 * x - 1.0) * u->half_width;
    if (is_atomic()) throw NotInvertible("inv_cdf: two-point distribution is not invertible");
    const auto& g = std::get<GaussianMixture>(kind_);
    if (x == 0.5) return 0.0;
    double lo = -g.center - 8.0 * g.std;
    double hi = g.center + 8.0 * g.std;
    while (cdf(lo) > x) lo -= 8.0 * g.std;
    while (cdf(hi) < x) hi += 8.0 * g.std;
    return numerics::bisect_increasing([this](double z) { return cdf(z); }, x, lo, hi, 1e-12, 200);
  }

  double density(double z) const {
    if (auto* u = std::get_if<UniformInterval>(&kind_))
      return std::abs(z) <= u->half_width ? 1.0 / (2.0 * u->half_width) : 0.0;
    if (is_atomic()) throw NoDensity("density: two-point distribution has no density");
    const auto& g = std::get<GaussianMixture>(kind_);
    return 0.5 * (normal_pdf((z - g.center) / g.std) + normal_pdf((z + g.center) / g.std)) / g.std;
  }

  double sample(Stream& rng) const {
    if (auto* u = std::get_if<UniformInterval>(&kind_))
      return (2.0 * rng.uniform() - 1.0) * u->half_width;
    if (auto* t = std::get_if<TwoPoint>(&kind_)) return rng.coin() ? t->magnitude : -t->magnitude;
    const auto& g = std::get<GaussianMixture>(kind_);
    const double sign = rng.coin() ? 1.0 : -1.0;
    return sign * g.center + g.std * rng.normal();
  }

  /// Canonical textual form, e.g. "uniform(0.5)".
  std::string name() const;

  friend bool operator==(const SymmetricDistribution& a, const SymmetricDistribution& b) {
    return a.name() == b.name();
  }

  static double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }
  static double normal_pdf(double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * numerics::kPi);
  }

 private:
  explicit SymmetricDistribution(Kind k) : kind_(k) {}
  Kind kind_;
};

namespace detail {

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + std::string(what) + " from '" + s + "'");
  }
  if (used != s.size())
    throw ConfigError("trailing characters in " + std::string(what) + ": '" + s + "'");
  return v;
}

}  // namespace detail

inline std::string SymmetricDistribution::name() const {
  using detail::format_real;
  if (auto* u = std::get_if<UniformInterval>(&kind_)) return "uniform(" + format_real(u->half_width) + ")";
  if (auto* t = std::get_if<TwoPoint>(&kind_)) return "twopoint(" + format_real(t->magnitude) + ")";
  const auto& g = std::get<GaussianMixture>(kind_);
  return "bigauss(" + format_real(g.center) + "," + format_real(g.std) + ")";
}

/// Parses "uniform(c)", "twopoint(c)" or "bigauss(m,s)", case-insensitively.
inline SymmetricDistribution parse_distribution(std::string_view text) {
  const std::string s = detail::lowercase(detail::trim(text));
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw ConfigError("distribution must look like name(args): '" + s + "'");
  const std::string head = detail::trim(s.substr(0, open));
  const std::string args = s.substr(open + 1, s.size() - open - 2);
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= args.size()) {
    auto comma = args.find(',', start);
    if (comma == std::string::npos) comma = args.size();
    values.push_back(detail::parse_real(args.substr(start, comma - start), head + " argument"));
    start = comma + 1;
  }
  auto expect = [&](std::size_t n) {
    if (values.size() != n)
      throw ConfigError(head + " expects " + std::to_string(n) + " argument(s)");
  };
  try {
    if (head == "uniform") {
      expect(1);
      return SymmetricDistribution::uniform(values[0]);
    }
    if (head == "twopoint") {
      expect(1);
      return SymmetricDistribution::two_point(values[0]);
    }
    if (head == "bigauss") {
      expect(2);
      return SymmetricDistribution::gaussian_mixture(values[0], values[1]);
    }
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown distribution kind '" + head + "'");
}

/// Empirical frequency of 1{inv_cdf(x) + eps >= 0} over n draws eps ~ dist.
/// Thresholding a well-invertible symmetric noise this way yields a
/// Bernoulli(x) key.
inline double check_calibrated_key(const SymmetricDistribution& dist, double x,
                                   std::uint64_t n_samples, Stream& rng) {
  const double e = dist.inv_cdf(x);
  if (n_samples == 0) throw DomainError("check_calibrated_key: need at least one sample");
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < n_samples; ++i)
    if (e + dist.sample(rng) >= 0.0) ++hits;
  return static_cast<double>(hits) / static_cast<double>(n_samples);
}

}  // namespace esg
