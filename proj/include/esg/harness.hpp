#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "esg/descent.hpp"
#include "esg/error.hpp"
#include "esg/estimators.hpp"
#include "esg/oracles.hpp"

namespace esg {

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct SeriesPoint {
  std::uint64_t oracle_calls = 0;
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;

  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

struct MethodSeries {
  std::string method;
  std::vector<SeriesPoint> points;

  friend bool operator==(const MethodSeries&, const MethodSeries&) = default;
};

/// Median and inter-quartile range of best-so-far, per method, on a shared
/// oracle-call grid.
struct AggregateSeries {
  std::vector<MethodSeries> methods;

  friend bool operator==(const AggregateSeries&, const AggregateSeries&) = default;
};

/// Percentile of sorted data with linear interpolation between order
/// statistics (position (n - 1) p).
inline double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptyInput("percentile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

/// Increasing oracle-call grid ending at `budget`: every call when the budget
/// is at most `points`, otherwise `points` evenly spaced counts.
inline std::vector<std::uint64_t> make_call_grid(std::uint64_t budget, std::size_t points = 1000) {
  if (budget < 1) throw ConfigError("budget must be >= 1");
  std::vector<std::uint64_t> grid;
  if (points == 0 || budget <= points) {
    for (std::uint64_t c = 1; c <= budget; ++c) grid.push_back(c);
    return grid;
  }
  for (std::size_t j = 1; j <= points; ++j) {
    const std::uint64_t c = (budget * j + points - 1) / points;
    if (grid.empty() || c > grid.back()) grid.push_back(c);
  }
  return grid;
}

/// Best-so-far of one trajectory on `grid`, carrying the last event forward.
inline std::vector<double> align_best_so_far(const Trajectory& t, std::span<const std::uint64_t> grid) {
  if (t.events.empty()) throw EmptyInput("trajectory has no oracle events");
  std::vector<double> out(grid.size());
  std::size_t k = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    while (k + 1 < t.events.size() && t.events[k + 1].oracle_calls <= grid[g]) ++k;
    out[g] = t.events[k].best;
  }
  return out;
}

inline MethodSeries aggregate_method(std::string method, std::span<const Trajectory> trials,
                                     std::span<const std::uint64_t> grid) {
  if (trials.empty()) throw EmptyInput("no trajectories for method '" + method + "'");
  std::vector<std::vector<double>> aligned;
  aligned.reserve(trials.size());
  for (const auto& t : trials) aligned.push_back(align_best_so_far(t, grid));
  MethodSeries series{std::move(method), {}};
  std::vector<double> column(trials.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t i = 0; i < trials.size(); ++i) column[i] = aligned[i][g];
    std::sort(column.begin(), column.end());
    series.points.push_back({grid[g], percentile_sorted(column, 0.5), percentile_sorted(column, 0.25),
                             percentile_sorted(column, 0.75)});
  }
  return series;
}

struct MethodTrials {
  std::string method;
  std::vector<Trajectory> trials;
};

inline AggregateSeries aggregate(std::span<const MethodTrials> runs, std::span<const std::uint64_t> grid) {
  if (runs.empty()) throw EmptyInput("aggregate: no methods");
  AggregateSeries out;
  for (const auto& r : runs) out.methods.push_back(aggregate_method(r.method, r.trials, grid));
  std::stable_sort(out.methods.begin(), out.methods.end(),
                   [](const MethodSeries& a, const MethodSeries& b) { return a.method < b.method; });
  return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kSeriesCsvHeader = "method,oracle_calls,median,p25,p75";

inline std::string format_series_csv(const AggregateSeries& series) {
  std::vector<const MethodSeries*> order;
  for (const auto& m : series.methods) order.push_back(&m);
  std::stable_sort(order.begin(), order.end(),
                   [](const MethodSeries* a, const MethodSeries* b) { return a->method < b->method; });
  std::string out(kSeriesCsvHeader);
  out += '\n';
  for (const auto* m : order) {
    std::vector<SeriesPoint> pts = m->points;
    std::stable_sort(pts.begin(), pts.end(),
                     [](const SeriesPoint& a, const SeriesPoint& b) { return a.oracle_calls < b.oracle_calls; });
    for (const auto& p : pts) {
      out += m->method;
      out += ',' + std::to_string(p.oracle_calls);
      out += ',' + detail::format_real(p.median);
      out += ',' + detail::format_real(p.p25);
      out += ',' + detail::format_real(p.p75);
      out += '\n';
    }
  }
  return out;
}

inline AggregateSeries parse_series_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kSeriesCsvHeader) throw ConfigError("series CSV: bad header");
  AggregateSeries out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 5) throw ConfigError("series CSV: expected 5 columns");
    if (out.methods.empty() || out.methods.back().method != cells[0]) out.methods.push_back({cells[0], {}});
    SeriesPoint p;
    p.oracle_calls = static_cast<std::uint64_t>(std::stoull(cells[1]));
    p.median = std::strtod(cells[2].c_str(), nullptr);
    p.p25 = std::strtod(cells[3].c_str(), nullptr);
    p.p75 = std::strtod(cells[4].c_str(), nullptr);
    out.methods.back().points.push_back(p);
  }
  return out;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string file_safe(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return out;
}

}  // namespace detail

inline void emit_csv(const AggregateSeries& series, const std::filesystem::path& path) {
  detail::write_file(path, format_series_csv(series));
}

/// step,oracle_calls,value,best_so_far for every oracle response of a run.
inline std::string format_trajectory_csv(const Trajectory& t) {
  std::string out = "step,oracle_calls,value,best_so_far\n";
  for (const auto& e : t.events) {
    out += std::to_string(e.step) + ',' + std::to_string(e.oracle_calls) + ',' + detail::format_real(e.value) +
           ',' + detail::format_real(e.best) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

/// Estimators built from good tuples are drawn solid, baselines dashed.
inline bool is_proposed_method(std::string_view label) {
  return label.starts_with("esg:") || label.starts_with("encoded_esg:");
}

inline std::string format_plot_svg(const AggregateSeries& series, std::string_view title = "best-so-far") {
  constexpr double width = 860, height = 520, left = 70, right = 200, top = 40, bottom = 60;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
  static const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
                                  "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b2df8a"};

  double x_max = 1, y_min = 0, y_max = 1;
  bool any = false;
  for (const auto& m : series.methods)
    for (const auto& p : m.points) {
      x_max = std::max(x_max, static_cast<double>(p.oracle_calls));
      if (!any) {
        y_min = p.p25;
        y_max = p.p75;
        any = true;
      }
      y_min = std::min({y_min, p.p25, p.median});
      y_max = std::max({y_max, p.p75, p.median});
    }
  if (y_max - y_min < 1e-9) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;
  auto px = [&](double c) { return left + plot_w * c / x_max; };
  auto py = [&](double v) { return top + plot_h * (1.0 - (v - y_min) / (y_max - y_min)); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
      << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
      << detail::xml_escape(title) << "</text>\n"
      << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
      << top + plot_h << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h << "\"/>\n"
      << "</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double c = x_max * k / 4.0, v = y_min + (y_max - y_min) * k / 4.0;
    svg << "<text x=\"" << num(px(c)) << "\" y=\"" << num(top + plot_h + 18) << "\" text-anchor=\"middle\">"
        << static_cast<std::uint64_t>(std::llround(c)) << "</text>\n";
    svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">" << num(v)
        << "</text>\n";
  }
  svg << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 16)
      << "\" text-anchor=\"middle\">oracle calls</text>\n</g>\n";

  for (std::size_t m = 0; m < series.methods.size(); ++m) {
    const auto& ms = series.methods[m];
    if (ms.points.empty()) continue;
    const char* color = palette[m % std::size(palette)];
    const bool proposed = is_proposed_method(ms.method);
    std::ostringstream band, line;
    for (std::size_t i = 0; i < ms.points.size(); ++i)
      band << (i ? " L" : "M") << num(px(static_cast<double>(ms.points[i].oracle_calls))) << ','
           << num(py(ms.points[i].p75));
    for (std::size_t i = ms.points.size(); i-- > 0;)
      band << " L" << num(px(static_cast<double>(ms.points[i].oracle_calls))) << ',' << num(py(ms.points[i].p25));
    band << " Z";
    for (std::size_t i = 0; i < ms.points.size(); ++i)
      line << (i ? " L" : "M") << num(px(static_cast<double>(ms.points[i].oracle_calls))) << ','
           << num(py(ms.points[i].median));
    const std::string label = detail::xml_escape(ms.method);
    svg << "<path class=\"band\" data-method=\"" << label << "\" d=\"" << band.str() << "\" fill=\"" << color
        << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    svg << "<path class=\"median\" data-method=\"" << label << "\" d=\"" << line.str() << "\" fill=\"none\" stroke=\""
        << color << "\" stroke-width=\"" << (proposed ? "2.5" : "1.5") << '"'
        << (proposed ? "" : " stroke-dasharray=\"6,4\"") << "/>\n";
    const double ly = top + 16.0 * static_cast<double>(m) + 8.0;
    svg << "<line x1=\"" << num(left + plot_w + 14) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + plot_w + 40)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (proposed ? "" : " stroke-dasharray=\"6,4\"") << "/>\n";
    svg << "<text class=\"legend\" x=\"" << num(left + plot_w + 46) << "\" y=\"" << num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void emit_plot(const AggregateSeries& series, const std::filesystem::path& path,
                      std::string_view title = "best-so-far") {
  detail::write_file(path, format_plot_svg(series, title));
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct MethodSpec {
  std::string label;
  DescentConfig config;
};

enum class RawOutput { none, improvements, full };

struct ExperimentSpec {
  ProblemSpec problem;
  std::vector<MethodSpec> methods;
  std::size_t n_trials = 20;
  std::uint64_t base_seed = 0;
  /// Oracle calls per trial; steps = budget / query cost.
  std::uint64_t budget = 1000;
  std::string output_dir = "out";
  std::size_t grid_points = 1000;
  RawOutput raw = RawOutput::improvements;
  std::string title;

  void validate() const {
    if (budget < 1) throw ConfigError("budget must be >= 1");
    if (methods.empty()) throw ConfigError("experiment needs at least one method");
    if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
    for (const auto& m : methods) {
      if (budget < static_cast<std::uint64_t>(m.config.estimator.query_cost()))
        throw ConfigError("budget too small for method " + m.label);
      m.config.validate();
    }
  }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& j, std::span<const std::string_view> known, std::string_view where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

inline constexpr std::array<std::string_view, 9> kDescentKeys = {
    "estimator", "direction", "steps", "schedule", "eta", "clamp", "x0", "seed", "snapshot_stride"};

/// Applies every descent field present in `j` on top of `cfg`.
inline void apply_descent_fields(const json& j, DescentConfig& cfg) {
  try {
    if (j.contains("estimator")) cfg.estimator = parse_estimator(j.at("estimator").get<std::string>());
    if (j.contains("direction")) {
      const std::string d = lowercase(j.at("direction").get<std::string>());
      if (d == "minimize") cfg.direction = Direction::minimize;
      else if (d == "maximize") cfg.direction = Direction::maximize;
      else throw ConfigError("direction must be minimize or maximize");
    }
    if (j.contains("steps")) cfg.steps = j.at("steps").get<std::uint64_t>();
    if (j.contains("schedule")) cfg.schedule.kind = parse_schedule_kind(j.at("schedule").get<std::string>());
    if (j.contains("eta")) cfg.schedule.eta = j.at("eta").get<double>();
    if (j.contains("clamp")) cfg.clamp = j.at("clamp").get<double>();
    if (j.contains("x0")) {
      const auto& x0 = j.at("x0");
      cfg.x0 = x0.is_array() ? x0.get<std::vector<double>>() : std::vector<double>{x0.get<double>()};
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("snapshot_stride")) cfg.snapshot_stride = j.at("snapshot_stride").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad descent field: ") + e.what());
  }
}

inline json parse_json_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace detail

/// Single-run configuration: a problem plus descent fields, and an optional
/// trajectory output path.
struct RunSpec {
  ProblemSpec problem;
  DescentConfig config;
  std::string output;
};

inline RunSpec parse_run_spec(std::string_view text) {
  const auto j = detail::parse_json_text(text);
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  std::vector<std::string_view> known(detail::kDescentKeys.begin(), detail::kDescentKeys.end());
  known.push_back("problem");
  known.push_back("output");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown key '" + key + "' in run config");
  if (!j.contains("problem") || !j.contains("estimator")) throw ConfigError("run config needs problem and estimator");
  RunSpec r;
  r.problem = parse_problem(j.at("problem").get<std::string>());
  detail::apply_descent_fields(j, r.config);
  if (j.contains("output")) r.output = j.at("output").get<std::string>();
  r.config.validate();
  return r;
}

/// Experiment spec, JSON:
///   problem, trials, base_seed, budget, output_dir, grid_points,
///   raw_trajectories ("none" | "improvements" | "full"), title,
///   defaults { descent fields }, methods [ "name" | { descent fields, label } ].
inline ExperimentSpec parse_experiment_spec(std::string_view text) {
  using detail::json;
  const auto j = detail::parse_json_text(text);
  if (!j.is_object()) throw ConfigError("experiment spec must be a JSON object");
  static constexpr std::array<std::string_view, 10> kSpecKeys = {
      "problem", "trials", "base_seed", "budget", "output_dir", "grid_points",
      "raw_trajectories", "title", "defaults", "methods"};
  detail::reject_unknown_keys(j, kSpecKeys, "experiment spec");
  ExperimentSpec spec;
  try {
    if (!j.contains("problem") || !j.contains("methods")) throw ConfigError("experiment needs problem and methods");
    spec.problem = parse_problem(j.at("problem").get<std::string>());
    if (j.contains("trials")) spec.n_trials = j.at("trials").get<std::size_t>();
    if (j.contains("base_seed")) spec.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("budget")) spec.budget = j.at("budget").get<std::uint64_t>();
    if (j.contains("output_dir")) spec.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("grid_points")) spec.grid_points = j.at("grid_points").get<std::size_t>();
    if (j.contains("title")) spec.title = j.at("title").get<std::string>();
    if (j.contains("raw_trajectories")) {
      const std::string r = detail::lowercase(j.at("raw_trajectories").get<std::string>());
      if (r == "none") spec.raw = RawOutput::none;
      else if (r == "improvements") spec.raw = RawOutput::improvements;
      else if (r == "full") spec.raw = RawOutput::full;
      else throw ConfigError("raw_trajectories must be none, improvements or full");
    }
    DescentConfig defaults;
    if (j.contains("defaults")) {
      const auto& d = j.at("defaults");
      detail::reject_unknown_keys(d, detail::kDescentKeys, "defaults");
      if (d.contains("estimator")) throw ConfigError("defaults may not name an estimator");
      detail::apply_descent_fields(d, defaults);
    }
    for (const auto& m : j.at("methods")) {
      MethodSpec method{{}, defaults};
      if (m.is_string()) {
        method.config.estimator = parse_estimator(m.get<std::string>());
      } else if (m.is_object()) {
        std::vector<std::string_view> known(detail::kDescentKeys.begin(), detail::kDescentKeys.end());
        known.push_back("label");
        for (const auto& [key, _] : m.items())
          if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown key '" + key + "' in method");
        if (!m.contains("estimator")) throw ConfigError("method object needs an estimator");
        detail::apply_descent_fields(m, method.config);
        if (m.contains("label")) method.label = m.at("label").get<std::string>();
      } else {
        throw ConfigError("method must be a string or an object");
      }
      if (method.label.empty()) method.label = method.config.estimator.label;
      spec.methods.push_back(std::move(method));
    }
  } catch (const detail::json::exception& e) {
    throw ConfigError(std::string("bad experiment spec: ") + e.what());
  }
  for (std::size_t a = 0; a < spec.methods.size(); ++a)
    for (std::size_t b = a + 1; b < spec.methods.size(); ++b)
      if (spec.methods[a].label == spec.methods[b].label)
        throw ConfigError("duplicate method label '" + spec.methods[a].label + "'");
  spec.validate();
  return spec;
}

inline ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  return parse_experiment_spec(detail::read_file(path));
}

inline RunSpec load_run_spec(const std::filesystem::path& path) { return parse_run_spec(detail::read_file(path)); }

// ---------------------------------------------------------------------------
// Experiment driver
// ---------------------------------------------------------------------------

struct ExperimentResult {
  AggregateSeries series;
  std::vector<MethodTrials> runs;
  std::filesystem::path csv_path;
  std::filesystem::path plot_path;
};

/// Runs every (method, trial) pair in memory and aggregates; no files.
inline ExperimentResult simulate_experiment(const ExperimentSpec& spec, unsigned threads = default_thread_count()) {
  spec.validate();
  ExperimentResult result;
  for (const auto& m : spec.methods) {
    DescentConfig cfg = m.config;
    cfg.steps = spec.budget / static_cast<std::uint64_t>(cfg.estimator.query_cost());
    try {
      result.runs.push_back({m.label, run_repeated(cfg, spec.problem, spec.n_trials, spec.base_seed, threads)});
    } catch (const Error& e) {
      throw Error("method " + m.label + ": " + e.what());
    }
  }
  const auto grid = make_call_grid(spec.budget, spec.grid_points);
  result.series = aggregate(result.runs, grid);
  return result;
}

/// Runs the experiment and writes aggregate.csv, plot.svg and per-method
/// trajectories under spec.output_dir.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads = default_thread_count()) {
  ExperimentResult result = simulate_experiment(spec, threads);
  const std::filesystem::path dir(spec.output_dir);
  result.csv_path = dir / "aggregate.csv";
  result.plot_path = dir / "plot.svg";
  emit_csv(result.series, result.csv_path);
  emit_plot(result.series, result.plot_path, spec.title.empty() ? spec.problem.text : spec.title);
  if (spec.raw != RawOutput::none) {
    for (const auto& r : result.runs) {
      std::string out = "trial,step,oracle_calls,value,best_so_far\n";
      for (std::size_t i = 0; i < r.trials.size(); ++i) {
        const auto& ev = r.trials[i].events;
        for (std::size_t k = 0; k < ev.size(); ++k) {
          const bool keep = spec.raw == RawOutput::full || k == 0 || k + 1 == ev.size() || ev[k].best != ev[k - 1].best;
          if (!keep) continue;
          out += std::to_string(i) + ',' + std::to_string(ev[k].step) + ',' + std::to_string(ev[k].oracle_calls) +
                 ',' + detail::format_real(ev[k].value) + ',' + detail::format_real(ev[k].best) + '\n';
        }
      }
      detail::write_file(dir / "trajectories" / (detail::file_safe(r.method) + ".csv"), out);
    }
  }
  return result;
}

}  // namespace esg
