#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "esg/error.hpp"
#include "esg/estimators.hpp"
#include "esg/oracles.hpp"
#include "esg/random.hpp"

namespace esg {

enum class Direction { minimize, maximize };

/// Learning-rate schedule eta_t for t = 1, 2, ...
struct Schedule {
  enum class Kind { constant, inverse_sqrt, inverse_t };
  Kind kind = Kind::constant;
  double eta = 0.1;

  double rate(std::uint64_t t) const {
    const double tt = static_cast<double>(std::max<std::uint64_t>(t, 1));
    switch (kind) {
      case Kind::constant:
        return eta;
      case Kind::inverse_sqrt:
        return eta / std::sqrt(tt);
      case Kind::inverse_t:
        return eta / tt;
    }
    return eta;
  }
};

inline Schedule::Kind parse_schedule_kind(std::string_view text) {
  const std::string s = detail::lowercase(detail::trim(text));
  if (s == "constant") return Schedule::Kind::constant;
  if (s == "inverse_sqrt") return Schedule::Kind::inverse_sqrt;
  if (s == "inverse_t") return Schedule::Kind::inverse_t;
  throw ConfigError("unknown schedule '" + s + "' (constant | inverse_sqrt | inverse_t)");
}

inline std::string schedule_kind_name(Schedule::Kind k) {
  switch (k) {
    case Schedule::Kind::constant:
      return "constant";
    case Schedule::Kind::inverse_sqrt:
      return "inverse_sqrt";
    case Schedule::Kind::inverse_t:
      return "inverse_t";
  }
  return "constant";
}

struct DescentConfig {
  EstimatorSpec estimator;
  Direction direction = Direction::minimize;
  std::uint64_t steps = 1;
  Schedule schedule;
  /// Iterates are projected into [clamp, 1 - clamp]^d (or its image in e-space).
  double clamp = 1e-4;
  /// Initial state; empty means all 1/2.
  std::vector<double> x0;
  std::uint64_t seed = 0;
  /// Store x every `snapshot_stride` steps; 0 means max(1, steps / 1000).
  std::uint64_t snapshot_stride = 0;

  void validate() const {
    if (steps < 1) throw ConfigError("descent needs at least one step");
    if (!(clamp > 0.0 && clamp < 0.5)) throw ConfigError("clamp must lie in (0, 1/2)");
    if (!(schedule.eta > 0.0) || !std::isfinite(schedule.eta))
      throw ScheduleError("learning rate must be positive");
  }

  std::uint64_t stride() const { return snapshot_stride ? snapshot_stride : std::max<std::uint64_t>(1, steps / 1000); }
};

/// One oracle response during a run.
struct TrajectoryEvent {
  std::uint64_t step = 0;
  /// Cumulative oracle calls including this one.
  std::uint64_t oracle_calls = 0;
  double value = 0.0;
  double best = 0.0;
};

struct Snapshot {
  std::uint64_t step = 0;
  std::vector<double> x;
};

struct Trajectory {
  std::vector<TrajectoryEvent> events;
  std::vector<Snapshot> snapshots;
  std::vector<double> final_x;

  double best() const { return events.empty() ? std::numeric_limits<double>::quiet_NaN() : events.back().best; }
};

/// Stream id used for estimator noise inside a run.
inline constexpr std::uint64_t kDescentNoiseStream = 1;

namespace detail {

inline std::vector<double> initial_state(const DescentConfig& cfg, std::size_t d) {
  std::vector<double> x = cfg.x0.empty() ? std::vector<double>(d, 0.5) : cfg.x0;
  if (x.size() == 1 && d > 1) x.assign(d, x[0]);
  if (x.size() != d) throw DimensionMismatch("initial state has the wrong dimension");
  for (double v : x)
    if (!(v > 0.0 && v < 1.0)) throw EncodingError("initial state must lie strictly inside (0, 1)^d");
  return x;
}

class BestTracker {
 public:
  explicit BestTracker(Direction dir) : dir_(dir) {}
  double update(double v) {
    if (!seen_ || (dir_ == Direction::maximize ? v > best_ : v < best_)) best_ = v;
    seen_ = true;
    return best_;
  }

 private:
  Direction dir_;
  double best_ = 0.0;
  bool seen_ = false;
};

template <class Step, class Decode>
Trajectory run_loop(const DescentConfig& cfg, std::vector<double> state, double lo, double hi, Step&& step,
                    Decode&& decode) {
  Trajectory traj;
  traj.events.reserve(cfg.steps * static_cast<std::uint64_t>(cfg.estimator.query_cost()));
  const double sign = cfg.direction == Direction::maximize ? 1.0 : -1.0;
  const std::uint64_t stride = cfg.stride();
  BestTracker best(cfg.direction);
  std::uint64_t calls = 0;
  Stream rng(cfg.seed, kDescentNoiseStream);

  traj.snapshots.push_back({0, decode(state)});
  for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
    EstimatorSample sample;
    try {
      sample = step(state, rng);
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " [step " + std::to_string(t) + "]");
    }
    for (double q : sample.responses) traj.events.push_back({t, ++calls, q, best.update(q)});
    const double eta = cfg.schedule.rate(t);
    for (std::size_t i = 0; i < state.size(); ++i)
      state[i] = std::clamp(state[i] + sign * eta * sample.gradient[i], lo, hi);
    if (t % stride == 0 || t == cfg.steps) traj.snapshots.push_back({t, decode(state)});
  }
  traj.final_x = decode(state);
  return traj;
}

}  // namespace detail

/// Single Query Descent in x-space: x <- clamp(x -/+ eta_t G(x)).
template <PointOracle O>
Trajectory sqd(const DescentConfig& cfg, const O& oracle) {
  cfg.validate();
  if (cfg.estimator.encoded()) throw ConfigError("sqd: use encoded_sqd for encoded estimators");
  auto x = detail::initial_state(cfg, oracle.dimension());
  return detail::run_loop(
      cfg, std::move(x), cfg.clamp, 1.0 - cfg.clamp,
      [&](const std::vector<double>& s, Stream& rng) { return draw(cfg.estimator, s, oracle, rng); },
      [](const std::vector<double>& s) { return s; });
}

/// Encoded Single Query Descent: the same dynamics on e = sigma_hat^{-1}(x),
/// decoded back through sigma_hat for snapshots and the final state.
template <PointOracle O>
Trajectory encoded_sqd(const DescentConfig& cfg, const O& oracle) {
  cfg.validate();
  if (!cfg.estimator.encoded() || !cfg.estimator.tuple)
    throw ConfigError("encoded_sqd needs an encoded_esg estimator");
  const GoodTuple& t = *cfg.estimator.tuple;
  auto x = detail::initial_state(cfg, oracle.dimension());
  std::vector<double> e(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) e[i] = t.sigma_hat->inv_cdf(x[i]);
  const double lo = t.sigma_hat->inv_cdf(cfg.clamp);
  const double hi = t.sigma_hat->inv_cdf(1.0 - cfg.clamp);
  return detail::run_loop(
      cfg, std::move(e), lo, hi,
      [&](const std::vector<double>& s, Stream& rng) { return encoded_esg(s, t, oracle, rng); },
      [&t](const std::vector<double>& s) {
        std::vector<double> out(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) out[i] = t.sigma_hat->cdf(s[i]);
        return out;
      });
}

/// Dispatches to sqd or encoded_sqd according to the estimator.
template <PointOracle O>
Trajectory descend(const DescentConfig& cfg, const O& oracle) {
  return cfg.estimator.encoded() ? encoded_sqd(cfg, oracle) : sqd(cfg, oracle);
}

/// Worker count for parallel trials: ESG_MAX_THREADS if set, otherwise the
/// number of hardware threads.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("ESG_MAX_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
/// (by index) is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < count; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Seed of trial i; the oracle (knapsack weights) uses stream 0 of this
/// seed and the descent noise uses stream kDescentNoiseStream.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial) { return derive_seed(base_seed, trial); }

/// n_trials independent runs. Each trial owns its oracle instance.
inline std::vector<Trajectory> run_repeated(const DescentConfig& cfg, const ProblemSpec& problem,
                                            std::size_t n_trials, std::uint64_t base_seed,
                                            unsigned threads = default_thread_count()) {
  if (n_trials < 1) throw ConfigError("run_repeated needs n_trials >= 1");
  std::vector<Trajectory> out(n_trials);
  parallel_for(n_trials, threads, [&](std::size_t i) {
    DescentConfig trial_cfg = cfg;
    trial_cfg.seed = trial_seed(base_seed, i);
    Stream oracle_rng(trial_cfg.seed, 0);
    const Oracle oracle = problem.instantiate(oracle_rng);
    try {
      out[i] = descend(trial_cfg, oracle);
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " [trial " + std::to_string(i) + "]");
    }
  });
  return out;
}

}  // namespace esg
