#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "esg/harness.hpp"

namespace {

namespace fs = std::filesystem;

esg::Trajectory constant_trajectory(double v, std::uint64_t calls) {
  esg::Trajectory t;
  for (std::uint64_t c = 1; c <= calls; ++c) t.events.push_back({c, c, v, v});
  return t;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("esg_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string small_spec(const std::string& out_dir) {
  return R"({
    "problem": "slice:8",
    "trials": 3,
    "base_seed": 5,
    "budget": 300,
    "grid_points": 50,
    "output_dir": ")" + out_dir + R"(",
    "defaults": {"direction": "maximize", "eta": 0.05},
    "methods": ["esg:arch", "reinforce", {"estimator": "arm", "label": "arm-fast", "eta": 0.2}]
  })";
}

TEST(Percentile, LinearInterpolation) {
  const std::vector<double> v{0, 10, 20};
  EXPECT_DOUBLE_EQ(esg::percentile_sorted(v, 0.5), 10.0);
  EXPECT_DOUBLE_EQ(esg::percentile_sorted(v, 0.25), 5.0);
  EXPECT_DOUBLE_EQ(esg::percentile_sorted(v, 0.75), 15.0);
  EXPECT_THROW(esg::percentile_sorted(std::vector<double>{}, 0.5), esg::EmptyInput);
}

TEST(Aggregate, ConstantsZeroTenTwenty) {
  std::vector<esg::MethodTrials> runs{{"m", {constant_trajectory(0, 5), constant_trajectory(10, 5), constant_trajectory(20, 5)}}};
  const auto grid = esg::make_call_grid(5);
  const auto s = esg::aggregate(runs, grid);
  for (const auto& p : s.methods[0].points) {
    EXPECT_DOUBLE_EQ(p.median, 10.0);
    EXPECT_DOUBLE_EQ(p.p25, 5.0);
    EXPECT_DOUBLE_EQ(p.p75, 15.0);
  }
}

TEST(Aggregate, IdenticalTrajectoriesCollapse) {
  esg::Trajectory t;
  for (std::uint64_t c = 1; c <= 20; ++c) t.events.push_back({c, c, double(c % 7), double(c)});
  std::vector<esg::MethodTrials> runs{{"m", {t, t, t, t}}};
  const auto grid = esg::make_call_grid(20);
  const auto agg = esg::aggregate(runs, grid);
  for (const auto& p : agg.methods[0].points) {
    EXPECT_EQ(p.p25, p.median);
    EXPECT_EQ(p.p75, p.median);
  }
}

TEST(Aggregate, CarryForward) {
  const auto grid = esg::make_call_grid(100, 10);
  const auto v = esg::align_best_so_far(constant_trajectory(4.0, 50), grid);
  for (std::size_t g = 0; g < grid.size(); ++g) EXPECT_EQ(v[g], 4.0);
  esg::Trajectory t;
  t.events = {{1, 1, 1, 1}, {2, 2, 3, 3}, {3, 3, 2, 3}, {4, 4, 9, 9}};
  const std::vector<std::uint64_t> g2{1, 2, 3, 4, 7};
  EXPECT_EQ(esg::align_best_so_far(t, g2), (std::vector<double>{1, 3, 3, 9, 9}));
  EXPECT_THROW(esg::align_best_so_far(esg::Trajectory{}, g2), esg::EmptyInput);
  EXPECT_THROW(esg::aggregate(std::vector<esg::MethodTrials>{}, g2), esg::EmptyInput);
}

TEST(Aggregate, PercentilesOrderedOnRandomData) {
  esg::Stream rng(71);
  std::vector<esg::Trajectory> trials;
  for (int i = 0; i < 7; ++i) {
    esg::Trajectory t;
    double best = -1e9;
    for (std::uint64_t c = 1; c <= 200; ++c) {
      const double v = rng.normal();
      best = std::max(best, v);
      t.events.push_back({c, c, v, best});
    }
    trials.push_back(t);
  }
  const auto grid = esg::make_call_grid(200, 40);
  const auto s = esg::aggregate(std::vector<esg::MethodTrials>{{"r", trials}}, grid);
  for (std::size_t g = 0; g < s.methods[0].points.size(); ++g) {
    const auto& p = s.methods[0].points[g];
    EXPECT_LE(p.p25, p.median);
    EXPECT_LE(p.median, p.p75);
    if (g) EXPECT_GT(p.oracle_calls, s.methods[0].points[g - 1].oracle_calls);
  }
}

TEST(Grid, Shape) {
  EXPECT_EQ(esg::make_call_grid(10, 1000).size(), 10u);
  const auto g = esg::make_call_grid(50000, 1000);
  EXPECT_EQ(g.size(), 1000u);
  EXPECT_EQ(g.front(), 50u);
  EXPECT_EQ(g.back(), 50000u);
  EXPECT_THROW(esg::make_call_grid(0), esg::ConfigError);
}

TEST(Csv, HeaderSortingAndEmpty) {
  EXPECT_EQ(esg::format_series_csv({}), "method,oracle_calls,median,p25,p75\n");
  esg::AggregateSeries s;
  s.methods.push_back({"zeta", {{2, 1, 1, 1}, {1, 0.1, 0, 0.2}}});
  s.methods.push_back({"alpha", {{1, 3, 2, 4}}});
  const auto csv = esg::format_series_csv(s);
  EXPECT_EQ(csv,
            "method,oracle_calls,median,p25,p75\n"
            "alpha,1,3,2,4\n"
            "zeta,1,0.10000000000000001,0,0.20000000000000001\n"
            "zeta,2,1,1,1\n");
  EXPECT_EQ(csv.find('\r'), std::string::npos);
}

TEST(Csv, RoundTripExact) {
  esg::Stream rng(72);
  esg::AggregateSeries s;
  for (const char* name : {"arm", "esg:arch", "reinforce"}) {
    esg::MethodSeries m{name, {}};
    for (std::uint64_t c = 1; c <= 50; ++c) {
      const double a = rng.normal() * 1e3, b = rng.normal() / 3, d = rng.uniform() * 1e-7;
      m.points.push_back({c * 7, a, b, d});
    }
    s.methods.push_back(m);
  }
  EXPECT_EQ(esg::parse_series_csv(esg::format_series_csv(s)), s);
  EXPECT_THROW(esg::parse_series_csv("bad header\n"), esg::ConfigError);
}

TEST(Svg, WellFormedWithBandsAndLegend) {
  esg::AggregateSeries s;
  s.methods.push_back({"esg:arch", {{1, 1, 0, 2}, {2, 3, 2, 4}}});
  s.methods.push_back({"reinforce", {{1, 0, 0, 0}, {2, 1, 0, 1}}});
  s.methods.push_back({"a<b&c", {{1, 5, 5, 5}}});
  const auto svg = esg::format_plot_svg(s, "title & more");
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  ASSERT_NO_THROW(boost::property_tree::read_xml(in, tree));

  int medians = 0, bands = 0;
  std::vector<std::string> legend;
  for (const auto& [tag, node] : tree.get_child("svg")) {
    if (tag == "path") {
      const auto cls = node.get<std::string>("<xmlattr>.class");
      if (cls == "median") {
        ++medians;
        const bool dashed = node.get_optional<std::string>("<xmlattr>.stroke-dasharray").has_value();
        EXPECT_EQ(dashed, !esg::is_proposed_method(node.get<std::string>("<xmlattr>.data-method")));
      }
      if (cls == "band") ++bands;
    }
    if (tag == "text" && node.get<std::string>("<xmlattr>.class", "") == "legend") legend.push_back(node.data());
  }
  EXPECT_EQ(medians, 3);
  EXPECT_EQ(bands, 3);
  EXPECT_EQ(legend, (std::vector<std::string>{"esg:arch", "reinforce", "a<b&c"}));
}

TEST(Spec, ParseAndValidate) {
  const auto spec = esg::parse_experiment_spec(small_spec("x"));
  EXPECT_EQ(spec.n_trials, 3u);
  ASSERT_EQ(spec.methods.size(), 3u);
  EXPECT_EQ(spec.methods[0].label, "esg:arch");
  EXPECT_EQ(spec.methods[0].config.direction, esg::Direction::maximize);
  EXPECT_DOUBLE_EQ(spec.methods[1].config.schedule.eta, 0.05);
  EXPECT_EQ(spec.methods[2].label, "arm-fast");
  EXPECT_DOUBLE_EQ(spec.methods[2].config.schedule.eta, 0.2);

  EXPECT_THROW(esg::parse_experiment_spec(R"({"problem":"slice:4","methods":[],"budget":10})"), esg::ConfigError);
  EXPECT_THROW(esg::parse_experiment_spec(R"({"problem":"slice:4","methods":["arm"],"budget":0})"), esg::ConfigError);
  EXPECT_THROW(esg::parse_experiment_spec(R"({"problem":"slice:4","methods":["arm"],"trials":0})"), esg::ConfigError);
  EXPECT_THROW(esg::parse_experiment_spec(R"({"problem":"slice:4","methods":["arm"],"budjet":5})"), esg::ConfigError);
  EXPECT_THROW(esg::parse_experiment_spec(R"({"problem":"slice:4","methods":["arm","arm"]})"), esg::ConfigError);
  EXPECT_THROW(esg::parse_experiment_spec("{not json"), esg::ConfigError);
}

TEST(Spec, RunConfigCoversDescentFields) {
  const auto r = esg::parse_run_spec(R"({
    "problem": "knapsack:6", "estimator": "encoded_esg:cosine", "direction": "maximize", "steps": 12,
    "schedule": "inverse_sqrt", "eta": 0.3, "clamp": 0.01, "x0": [0.2, 0.3, 0.4, 0.5, 0.6, 0.7],
    "seed": 9, "snapshot_stride": 4, "output": "t.csv"})");
  EXPECT_EQ(r.config.steps, 12u);
  EXPECT_EQ(r.config.schedule.kind, esg::Schedule::Kind::inverse_sqrt);
  EXPECT_DOUBLE_EQ(r.config.clamp, 0.01);
  EXPECT_EQ(r.config.x0.size(), 6u);
  EXPECT_EQ(r.config.seed, 9u);
  EXPECT_EQ(r.config.snapshot_stride, 4u);
  EXPECT_EQ(r.output, "t.csv");
  EXPECT_THROW(esg::parse_run_spec(R"({"problem":"slice:3"})"), esg::ConfigError);
  EXPECT_THROW(esg::parse_run_spec(R"({"problem":"slice:3","estimator":"arm","etaa":1})"), esg::ConfigError);
}

TEST(Experiment, SingleTrialTinyBudget) {
  const auto dir = scratch("tiny");
  const auto spec = esg::parse_experiment_spec(R"({"problem":"slice:5","trials":1,"budget":10,"methods":["esg:spike"],
      "output_dir":")" + dir.string() + R"("})");
  const auto result = esg::run_experiment(spec, 1);
  const auto parsed = esg::parse_series_csv(esg::detail::read_file(result.csv_path));
  ASSERT_EQ(parsed.methods.size(), 1u);
  EXPECT_LE(parsed.methods[0].points.size(), 10u);
  for (const auto& p : parsed.methods[0].points) {
    EXPECT_EQ(p.p25, p.median);
    EXPECT_EQ(p.p75, p.median);
  }
  EXPECT_TRUE(fs::exists(result.plot_path));
  EXPECT_TRUE(fs::exists(dir / "trajectories" / "esg_spike.csv"));
  fs::remove_all(dir);
}

TEST(Experiment, ByteIdenticalReruns) {
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  const auto r1 = esg::run_experiment(esg::parse_experiment_spec(small_spec(d1.string())), 2);
  const auto r2 = esg::run_experiment(esg::parse_experiment_spec(small_spec(d2.string())), 1);
  EXPECT_EQ(esg::detail::read_file(r1.csv_path), esg::detail::read_file(r2.csv_path));
  EXPECT_EQ(esg::detail::read_file(r1.plot_path), esg::detail::read_file(r2.plot_path));
  EXPECT_EQ(esg::detail::read_file(d1 / "trajectories" / "arm-fast.csv"),
            esg::detail::read_file(d2 / "trajectories" / "arm-fast.csv"));
  EXPECT_EQ(r1.series.methods.size(), 3u);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Experiment, TwoQueryMethodsShareTheCallAxis) {
  const auto spec = esg::parse_experiment_spec(small_spec("unused"));
  const auto result = esg::simulate_experiment(spec, 1);
  for (const auto& r : result.runs)
    for (const auto& t : r.trials) EXPECT_EQ(t.events.back().oracle_calls, 300u) << r.method;
}

TEST(Experiment, UnwritableOutput) {
  auto spec = esg::parse_experiment_spec(small_spec("/proc/esg_cannot_write"));
  EXPECT_THROW(esg::run_experiment(spec, 1), esg::IoError);
}

}  // namespace
