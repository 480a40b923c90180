#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "esg/distributions.hpp"
#include "esg/error.hpp"
#include "esg/oracles.hpp"
#include "esg/random.hpp"
#include "esg/tuples.hpp"

namespace esg {

/// One realization of a stochastic estimator.
struct EstimatorSample {
  /// Queried vertices, in query order (one or two).
  std::vector<BinaryVector> keys;
  /// Oracle responses, aligned with `keys`.
  std::vector<double> responses;
  /// Stochastic value V; NaN when the estimator defines none.
  double value = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> gradient;
  int queries = 0;

  bool has_value() const { return !std::isnan(value); }
};

enum class EstimatorKind { esg, encoded_esg, naive, reinforce, arm, disarm };

/// Estimator selected by name: esg:<tuple> | encoded_esg:<tuple> | naive |
/// naive:<distribution> | reinforce | arm | disarm.
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::esg;
  std::optional<GoodTuple> tuple;
  SymmetricDistribution naive_noise = SymmetricDistribution::uniform(0.5);
  std::string label;

  int query_cost() const {
    return (kind == EstimatorKind::arm || kind == EstimatorKind::disarm) ? 2 : 1;
  }
  bool defines_value() const {
    return kind == EstimatorKind::esg || kind == EstimatorKind::encoded_esg || kind == EstimatorKind::naive;
  }
  bool encoded() const { return kind == EstimatorKind::encoded_esg; }
  /// True for the estimators built from good tuples.
  bool proposed() const { return kind == EstimatorKind::esg || kind == EstimatorKind::encoded_esg; }
};

inline EstimatorSpec parse_estimator(std::string_view text) {
  const std::string s = detail::trim(text);
  const auto colon = s.find(':');
  const std::string head = detail::lowercase(s.substr(0, colon));
  const std::string arg = colon == std::string::npos ? std::string{} : s.substr(colon + 1);
  EstimatorSpec spec;
  if (head == "esg" || head == "encoded_esg") {
    if (arg.empty()) throw ConfigError(head + " needs a tuple, e.g. " + head + ":arch");
    spec.kind = head == "esg" ? EstimatorKind::esg : EstimatorKind::encoded_esg;
    spec.tuple = esg::make_tuple(arg);
    spec.label = head + ":" + spec.tuple->name;
    return spec;
  }
  if (head == "naive") {
    spec.kind = EstimatorKind::naive;
    if (!arg.empty()) {
      spec.naive_noise = parse_distribution(arg);
      if (!spec.naive_noise.well_invertible())
        throw ConfigError("naive estimator needs a well-invertible distribution");
      spec.label = "naive:" + spec.naive_noise.name();
    } else {
      spec.label = "naive";
    }
    return spec;
  }
  if (!arg.empty()) throw ConfigError("estimator '" + head + "' takes no argument");
  if (head == "reinforce") spec.kind = EstimatorKind::reinforce;
  else if (head == "arm") spec.kind = EstimatorKind::arm;
  else if (head == "disarm") spec.kind = EstimatorKind::disarm;
  else throw ConfigError("unknown estimator '" + s + "'");
  spec.label = head;
  return spec;
}

namespace detail {

inline void require_open_box(std::span<const double> x) {
  for (double xi : x)
    if (!(xi > 0.0 && xi < 1.0)) throw DomainError("state must lie strictly inside (0, 1)^d");
}

template <PointOracle O>
void require_dimension(std::span<const double> x, const O& oracle) {
  if (x.size() != oracle.dimension())
    throw DimensionMismatch("state has dimension " + std::to_string(x.size()) + ", oracle has " +
                            std::to_string(oracle.dimension()));
  if (x.empty()) throw DomainError("state must have d >= 1");
}

/// Shared body of ESG and encoded ESG at embedding e and noise eps.
/// `scale[i]` multiplies the derivative of f(|z_i|) with respect to e_i
/// (1 / sigma_hat'(e_i) for x-space gradients); empty means 1.
template <PointOracle O>
EstimatorSample easy_sample(std::span<const double> e, std::span<const double> noise,
                            std::span<const double> scale, const GoodTuple& t, const O& oracle) {
  const std::size_t d = e.size();
  EstimatorSample out;
  BinaryVector key(d);
  std::vector<double> fv(d), dv(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double z = e[i] + noise[i];
    const double a = std::abs(z);
    key[i] = z >= 0.0 ? 1 : 0;
    fv[i] = t.f(a);
    const double slope = z > 0.0 ? t.f_prime(a) : (z < 0.0 ? -t.f_prime(a) : 0.0);
    dv[i] = scale.empty() ? slope : slope * scale[i];
  }
  const double q = oracle.query(key);

  // prod_{j != i} f_j via prefix/suffix products (some f_j may be zero).
  std::vector<double> suffix(d + 1);
  suffix[d] = 1.0;
  for (std::size_t i = d; i-- > 0;) suffix[i] = suffix[i + 1] * fv[i];
  out.gradient.resize(d);
  double prefix = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    out.gradient[i] = q * dv[i] * prefix * suffix[i + 1];
    prefix *= fv[i];
  }
  out.value = q * suffix[0];
  out.keys.push_back(std::move(key));
  out.responses.push_back(q);
  out.queries = 1;
  return out;
}

inline void require_encoded_interior(std::span<const double> e, const GoodTuple& t) {
  const auto [lo, hi] = t.sigma_hat->support();
  for (double ei : e)
    if (!(ei > lo && ei < hi) || !std::isfinite(ei))
      throw DomainError("encoded state must lie in the interior of the encoding support");
}

}  // namespace detail

/// Embedding and derivative scale of ESG at a fixed state x.
struct EsgPlan {
  std::vector<double> embedding;
  /// 1 / sigma_hat'(embedding_i)
  std::vector<double> scale;
};

inline EsgPlan plan_esg(std::span<const double> x, const GoodTuple& t) {
  detail::require_open_box(x);
  EsgPlan plan;
  plan.embedding.resize(x.size());
  plan.scale.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = t.sigma_hat->inv_cdf(x[i]);
    const double dens = t.sigma_hat->density(e);
    if (!(dens > 0.0))
      throw TupleError(t.name + ": encoding density vanishes at x = " + std::to_string(x[i]));
    plan.embedding[i] = e;
    plan.scale[i] = 1.0 / dens;
  }
  return plan;
}

inline std::vector<double> sample_noise(const SymmetricDistribution& dist, std::size_t d, Stream& rng) {
  std::vector<double> eps(d);
  for (auto& v : eps) v = dist.sample(rng);
  return eps;
}

/// Easy Stochastic Gradient at x with caller-supplied noise eps ~ sigma.
template <PointOracle O>
EstimatorSample esg_with_noise(std::span<const double> x, const GoodTuple& t, const O& oracle,
                               std::span<const double> noise) {
  detail::require_dimension(x, oracle);
  if (noise.size() != x.size()) throw DimensionMismatch("esg: noise dimension mismatch");
  const EsgPlan plan = plan_esg(x, t);
  return detail::easy_sample(plan.embedding, noise, plan.scale, t, oracle);
}

/// Easy Stochastic Gradient: a single-query sample whose value is unbiased
/// for v(x) and whose gradient is unbiased for grad v(x).
template <PointOracle O>
EstimatorSample esg(std::span<const double> x, const GoodTuple& t, const O& oracle, Stream& rng) {
  detail::require_dimension(x, oracle);
  const EsgPlan plan = plan_esg(x, t);
  const auto noise = sample_noise(t.sigma, x.size(), rng);
  return detail::easy_sample(plan.embedding, noise, plan.scale, t, oracle);
}

template <PointOracle O>
EstimatorSample encoded_esg_with_noise(std::span<const double> e, const GoodTuple& t, const O& oracle,
                                       std::span<const double> noise) {
  detail::require_dimension(e, oracle);
  detail::require_encoded_interior(e, t);
  if (noise.size() != e.size()) throw DimensionMismatch("encoded_esg: noise dimension mismatch");
  return detail::easy_sample(e, noise, {}, t, oracle);
}

/// ESG evaluated directly on the embedding e = sigma_hat^{-1}(x); the
/// gradient is with respect to e (no division by the encoding density).
template <PointOracle O>
EstimatorSample encoded_esg(std::span<const double> e, const GoodTuple& t, const O& oracle, Stream& rng) {
  detail::require_dimension(e, oracle);
  detail::require_encoded_interior(e, t);
  const auto noise = sample_noise(t.sigma, e.size(), rng);
  return detail::easy_sample(e, noise, {}, t, oracle);
}

/// V = Q(K) with a calibrated key K ~ Bernoulli(x); the pathwise gradient is
/// identically zero.
template <PointOracle O>
EstimatorSample naive_value(std::span<const double> x, const SymmetricDistribution& dist, const O& oracle,
                            Stream& rng) {
  detail::require_dimension(x, oracle);
  detail::require_open_box(x);
  BinaryVector key(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) key[i] = dist.inv_cdf(x[i]) + dist.sample(rng) >= 0.0 ? 1 : 0;
  EstimatorSample out;
  const double q = oracle.query(key);
  out.value = q;
  out.gradient.assign(x.size(), 0.0);
  out.keys.push_back(std::move(key));
  out.responses.push_back(q);
  out.queries = 1;
  return out;
}

/// Score-function estimator Q(Y) grad_x log P_x(Y).
template <PointOracle O>
EstimatorSample reinforce(std::span<const double> x, const O& oracle, Stream& rng) {
  detail::require_dimension(x, oracle);
  detail::require_open_box(x);
  const std::size_t d = x.size();
  BinaryVector y(d);
  for (std::size_t i = 0; i < d; ++i) y[i] = rng.uniform() < x[i] ? 1 : 0;
  const double q = oracle.query(y);
  EstimatorSample out;
  out.gradient.resize(d);
  for (std::size_t i = 0; i < d; ++i) out.gradient[i] = q * (y[i] ? 1.0 / x[i] : -1.0 / (1.0 - x[i]));
  out.keys.push_back(std::move(y));
  out.responses.push_back(q);
  out.queries = 1;
  return out;
}

namespace detail {

struct AntitheticPair {
  std::vector<double> u;
  BinaryVector first;   // 1{u > 1 - x}
  BinaryVector second;  // 1{u < x}
};

inline AntitheticPair antithetic_pair(std::span<const double> x, Stream& rng) {
  AntitheticPair p;
  const std::size_t d = x.size();
  p.u.resize(d);
  p.first.resize(d);
  p.second.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    p.u[i] = rng.uniform_open();
    p.first[i] = p.u[i] > 1.0 - x[i] ? 1 : 0;
    p.second[i] = p.u[i] < x[i] ? 1 : 0;
  }
  return p;
}

}  // namespace detail

/// Augment-REINFORCE-merge with Bernoulli logits phi = logit(x); the logit
/// gradient is mapped to x-space through dphi/dx = 1 / (x (1 - x)).
template <PointOracle O>
EstimatorSample arm(std::span<const double> x, const O& oracle, Stream& rng) {
  detail::require_dimension(x, oracle);
  detail::require_open_box(x);
  auto pair = detail::antithetic_pair(x, rng);
  const double q1 = oracle.query(pair.first);
  const double q2 = oracle.query(pair.second);
  EstimatorSample out;
  out.gradient.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double logit_grad = (q1 - q2) * (pair.u[i] - 0.5);
    out.gradient[i] = logit_grad / (x[i] * (1.0 - x[i]));
  }
  out.keys = {std::move(pair.first), std::move(pair.second)};
  out.responses = {q1, q2};
  out.queries = 2;
  return out;
}

/// DisARM: ARM with the antithetic noise integrated out per coordinate.
template <PointOracle O>
EstimatorSample disarm(std::span<const double> x, const O& oracle, Stream& rng) {
  detail::require_dimension(x, oracle);
  detail::require_open_box(x);
  auto pair = detail::antithetic_pair(x, rng);
  const double q1 = oracle.query(pair.first);
  const double q2 = oracle.query(pair.second);
  EstimatorSample out;
  out.gradient.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double logit_grad = 0.0;
    if (pair.first[i] != pair.second[i]) {
      const double sign = pair.second[i] ? -1.0 : 1.0;
      const double sig_abs = std::max(x[i], 1.0 - x[i]);  // sigmoid(|phi|)
      logit_grad = 0.5 * (q1 - q2) * sign * sig_abs;
    }
    out.gradient[i] = logit_grad / (x[i] * (1.0 - x[i]));
  }
  out.keys = {std::move(pair.first), std::move(pair.second)};
  out.responses = {q1, q2};
  out.queries = 2;
  return out;
}

/// Draws one sample of `spec` at `point` (the embedding e for encoded ESG,
/// the state x otherwise).
template <PointOracle O>
EstimatorSample draw(const EstimatorSpec& spec, std::span<const double> point, const O& oracle, Stream& rng) {
  switch (spec.kind) {
    case EstimatorKind::esg:
      return esg(point, *spec.tuple, oracle, rng);
    case EstimatorKind::encoded_esg:
      return encoded_esg(point, *spec.tuple, oracle, rng);
    case EstimatorKind::naive:
      return naive_value(point, spec.naive_noise, oracle, rng);
    case EstimatorKind::reinforce:
      return reinforce(point, oracle, rng);
    case EstimatorKind::arm:
      return arm(point, oracle, rng);
    case EstimatorKind::disarm:
      return disarm(point, oracle, rng);
  }
  throw ConfigError("unknown estimator kind");
}

/// Single-pass (Welford) mean and variance of a stream of vectors.
class RunningMoments {
 public:
  explicit RunningMoments(std::size_t dim = 0) : mean_(dim, 0.0), m2_(dim, 0.0) {}

  void push(std::span<const double> v) {
    if (mean_.empty() && count_ == 0) {
      mean_.assign(v.size(), 0.0);
      m2_.assign(v.size(), 0.0);
    }
    ++count_;
    const double n = static_cast<double>(count_);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double delta = v[i] - mean_[i];
      mean_[i] += delta / n;
      m2_[i] += delta * (v[i] - mean_[i]);
    }
  }

  std::uint64_t count() const { return count_; }
  const std::vector<double>& mean() const { return mean_; }

  /// Unbiased sample variance.
  std::vector<double> variance() const {
    std::vector<double> v(m2_.size(), 0.0);
    if (count_ < 2) return v;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = m2_[i] / static_cast<double>(count_ - 1);
    return v;
  }

  std::vector<double> std_err() const {
    auto v = variance();
    for (auto& s : v) s = std::sqrt(s / static_cast<double>(count_));
    return v;
  }

 private:
  std::uint64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

struct EstimateSummary {
  std::string estimator;
  std::uint64_t n_samples = 0;
  /// Gradient statistics in the estimator's own coordinates (e-space for
  /// encoded ESG, x-space otherwise).
  std::vector<double> mean_gradient;
  std::vector<double> variance;
  std::vector<double> std_err;
  std::optional<double> mean_value;
  std::optional<double> value_variance;
  std::optional<double> value_std_err;
  /// Empirical P[k_i = 1] of the first queried key.
  std::vector<double> key_frequency;
  std::uint64_t total_queries = 0;
};

/// Monte Carlo summary of n_samples independent draws at state x.
template <PointOracle O>
EstimateSummary estimate_mean_and_variance(const EstimatorSpec& spec, std::span<const double> x, const O& oracle,
                                           std::uint64_t n_samples, Stream& rng) {
  if (n_samples < 2) throw DomainError("estimate_mean_and_variance needs n_samples >= 2");
  detail::require_dimension(x, oracle);
  detail::require_open_box(x);
  const std::size_t d = x.size();

  std::optional<EsgPlan> plan;
  std::vector<double> point(x.begin(), x.end());
  if (spec.kind == EstimatorKind::esg) {
    plan = plan_esg(x, *spec.tuple);
  } else if (spec.kind == EstimatorKind::encoded_esg) {
    for (std::size_t i = 0; i < d; ++i) point[i] = spec.tuple->sigma_hat->inv_cdf(x[i]);
    detail::require_encoded_interior(point, *spec.tuple);
  }

  RunningMoments grad(d), value(1), keys(d);
  std::vector<double> noise(d), key_row(d);
  std::uint64_t queries = 0;
  for (std::uint64_t s = 0; s < n_samples; ++s) {
    EstimatorSample sample;
    if (plan || spec.kind == EstimatorKind::encoded_esg) {
      for (auto& v : noise) v = spec.tuple->sigma.sample(rng);
      sample = plan ? detail::easy_sample(plan->embedding, noise, plan->scale, *spec.tuple, oracle)
                    : detail::easy_sample(point, noise, {}, *spec.tuple, oracle);
    } else {
      sample = draw(spec, point, oracle, rng);
    }
    grad.push(sample.gradient);
    if (sample.has_value()) {
      const double v = sample.value;
      value.push(std::span<const double>(&v, 1));
    }
    for (std::size_t i = 0; i < d; ++i) key_row[i] = sample.keys.front()[i];
    keys.push(key_row);
    queries += static_cast<std::uint64_t>(sample.queries);
  }

  EstimateSummary out;
  out.estimator = spec.label;
  out.n_samples = n_samples;
  out.mean_gradient = grad.mean();
  out.variance = grad.variance();
  out.std_err = grad.std_err();
  if (spec.defines_value()) {
    out.mean_value = value.mean()[0];
    out.value_variance = value.variance()[0];
    out.value_std_err = value.std_err()[0];
  }
  out.key_frequency = keys.mean();
  out.total_queries = queries;
  return out;
}

}  // namespace esg
