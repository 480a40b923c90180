#pragma once

#include <atomic>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "esg/distributions.hpp"
#include "esg/error.hpp"
#include "esg/random.hpp"

namespace esg {

using Bit = std::uint8_t;
using BinaryVector = std::vector<Bit>;
using ProbVector = std::vector<double>;

/// Anything that maps a binary vector of fixed dimension to a real payoff.
template <class O>
concept PointOracle = requires(const O& o, std::span<const Bit> y) {
  { o.query(y) } -> std::convertible_to<double>;
  { o.dimension() } -> std::convertible_to<std::size_t>;
};

inline int hamming_weight(std::span<const Bit> y) {
  int s = 0;
  for (Bit b : y) s += b ? 1 : 0;
  return s;
}

/// Dense lookup table indexed by sum_i y_i 2^i.
struct TableOracle {
  std::size_t dim = 0;
  std::vector<double> values;
};

/// Payoff depending on the Hamming weight only: a spike at the all-ones
/// vertex, a plateau around d/2 and a penalty for light vectors.
struct SymmetricSliceOracle {
  std::size_t dim = 0;
};

/// Weighted subset-sum band around half the total weight.
struct KnapsackOracle {
  std::vector<int> weights;
  long target = 0;
};

inline constexpr std::size_t kMaxTableDimension = 25;

/// Pointwise oracle with a monotone, thread-safe call counter.
class Oracle {
 public:
  using Kind = std::variant<TableOracle, SymmetricSliceOracle, KnapsackOracle>;

  explicit Oracle(Kind kind) : kind_(std::move(kind)) {}
  Oracle(const Oracle& other) : kind_(other.kind_), calls_(other.calls_.load()) {}
  Oracle& operator=(const Oracle& other) {
    kind_ = other.kind_;
    calls_.store(other.calls_.load());
    return *this;
  }

  const Kind& kind() const { return kind_; }

  std::size_t dimension() const {
    if (auto* t = std::get_if<TableOracle>(&kind_)) return t->dim;
    if (auto* s = std::get_if<SymmetricSliceOracle>(&kind_)) return s->dim;
    return std::get<KnapsackOracle>(kind_).weights.size();
  }

  double query(std::span<const Bit> y) const {
    if (y.size() != dimension())
      throw DimensionMismatch("query: got " + std::to_string(y.size()) + " bits, oracle has dimension " +
                              std::to_string(dimension()));
    calls_.fetch_add(1, std::memory_order_relaxed);
    return evaluate(y);
  }

  /// Q(y) without touching the counter.
  double evaluate(std::span<const Bit> y) const {
    if (auto* t = std::get_if<TableOracle>(&kind_)) {
      std::size_t idx = 0;
      for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i]) idx |= std::size_t{1} << i;
      return t->values[idx];
    }
    if (auto* s = std::get_if<SymmetricSliceOracle>(&kind_)) return slice_value(s->dim, hamming_weight(y));
    const auto& k = std::get<KnapsackOracle>(kind_);
    long total = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i]) total += k.weights[i];
    if (total > k.target + 2) return -5.0;
    if (total < k.target - 2) return 0.0;
    return 20.0;
  }

  std::uint64_t read_counter() const { return calls_.load(); }
  void reset_counter() { calls_.store(0); }

  static double slice_value(std::size_t d, int s) {
    const auto dd = static_cast<long>(d);
    if (s == dd) return 3.0;
    // floor(0.133 d) and floor(0.233 d), computed exactly in integers.
    const long band = (133 * dd) / 1000;
    const long low = (233 * dd) / 1000;
    if (std::labs(s - dd / 2) <= band) return 18.0;
    if (s <= low) return -2.0;
    return 0.0;
  }

 private:
  Kind kind_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

static_assert(PointOracle<Oracle>);

inline Oracle make_symmetric_slice(std::size_t d) {
  if (d < 1) throw DomainError("symmetric slice needs d >= 1");
  return Oracle(SymmetricSliceOracle{d});
}

/// Weights drawn i.i.d. from {1, ..., 9}; target floor(sum / 2).
inline Oracle make_knapsack(std::size_t d, Stream& rng) {
  if (d < 1) throw DomainError("knapsack needs d >= 1");
  KnapsackOracle k;
  k.weights.resize(d);
  for (auto& w : k.weights) w = rng.uniform_int(1, 9);
  k.target = std::accumulate(k.weights.begin(), k.weights.end(), 0L) / 2;
  return Oracle(std::move(k));
}

inline Oracle make_knapsack(std::vector<int> weights) {
  if (weights.empty()) throw DomainError("knapsack needs d >= 1");
  KnapsackOracle k;
  k.target = std::accumulate(weights.begin(), weights.end(), 0L) / 2;
  k.weights = std::move(weights);
  return Oracle(std::move(k));
}

inline Oracle make_table(std::size_t d, std::vector<double> values) {
  if (d < 1 || d > kMaxTableDimension)
    throw DimensionTooLarge("table oracle supports 1 <= d <= " + std::to_string(kMaxTableDimension));
  if (values.size() != (std::size_t{1} << d))
    throw DimensionMismatch("table oracle needs 2^d values");
  return Oracle(TableOracle{d, std::move(values)});
}

/// Table with i.i.d. Unif[lo, hi] entries.
inline Oracle make_random_table(std::size_t d, Stream& rng, double lo = -10.0, double hi = 10.0) {
  std::vector<double> v(std::size_t{1} << d);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
  return make_table(d, std::move(v));
}

inline BinaryVector bits_from_index(std::size_t index, std::size_t d) {
  BinaryVector y(d);
  for (std::size_t i = 0; i < d; ++i) y[i] = static_cast<Bit>((index >> i) & 1U);
  return y;
}

/// Parses a table CSV with columns `bits,value`. The bit string lists y_1
/// first (leftmost). A header row is optional; every vertex must appear once.
inline Oracle parse_table_csv(std::istream& in) {
  std::vector<std::pair<std::string, double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ConfigError("table line " + std::to_string(lineno) + ": expected bits,value");
    const std::string bits = detail::trim(s.substr(0, comma));
    const std::string value = s.substr(comma + 1);
    if (rows.empty() && detail::lowercase(bits) == "bits") continue;
    if (bits.empty() || bits.find_first_not_of("01") != std::string::npos)
      throw ConfigError("table line " + std::to_string(lineno) + ": bits must be a 0/1 string");
    rows.emplace_back(bits, detail::parse_real(value, "table value"));
  }
  if (rows.empty()) throw ConfigError("table file has no rows");
  const std::size_t d = rows.front().first.size();
  if (d > kMaxTableDimension) throw DimensionTooLarge("table dimension above " + std::to_string(kMaxTableDimension));
  std::vector<double> values(std::size_t{1} << d);
  std::vector<bool> seen(values.size(), false);
  for (const auto& [bits, v] : rows) {
    if (bits.size() != d) throw ConfigError("table rows have inconsistent bit lengths");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < d; ++i)
      if (bits[i] == '1') idx |= std::size_t{1} << i;
    if (seen[idx]) throw ConfigError("duplicate table row " + bits);
    seen[idx] = true;
    values[idx] = v;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw ConfigError("table is missing a vertex (" + std::to_string(seen.size()) + " expected)");
  return make_table(d, std::move(values));
}

inline Oracle load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open table file '" + path + "'");
  return parse_table_csv(in);
}

/// A problem named on the command line or in a config file:
/// slice:<d> | knapsack:<d> | table:<path>.
struct ProblemSpec {
  enum class Kind { slice, knapsack, table };
  Kind kind = Kind::slice;
  std::size_t dim = 0;
  std::string path;
  std::string text;

  /// Builds a fresh oracle; knapsack weights come from `rng`.
  Oracle instantiate(Stream& rng) const {
    switch (kind) {
      case Kind::slice:
        return make_symmetric_slice(dim);
      case Kind::knapsack:
        return make_knapsack(dim, rng);
      case Kind::table:
        return load_table_csv(path);
    }
    throw ConfigError("bad problem kind");
  }
};

inline ProblemSpec parse_problem(std::string_view text) {
  const std::string s = detail::trim(text);
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("problem must be slice:<d>, knapsack:<d> or table:<path>");
  const std::string head = detail::lowercase(s.substr(0, colon));
  const std::string arg = s.substr(colon + 1);
  ProblemSpec p;
  p.text = s;
  if (head == "table") {
    p.kind = ProblemSpec::Kind::table;
    p.path = arg;
    if (p.path.empty()) throw ConfigError("table problem needs a path");
    return p;
  }
  const double d = detail::parse_real(arg, "problem dimension");
  if (!(d >= 1.0) || d != std::floor(d)) throw ConfigError("problem dimension must be a positive integer");
  p.dim = static_cast<std::size_t>(d);
  if (head == "slice") p.kind = ProblemSpec::Kind::slice;
  else if (head == "knapsack") p.kind = ProblemSpec::Kind::knapsack;
  else throw ConfigError("unknown problem kind '" + head + "'");
  return p;
}

}  // namespace esg
