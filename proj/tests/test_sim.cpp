#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "tlreg/csv.hpp"
#include "tlreg/sim.hpp"

using namespace tlreg;

TEST_CASE("series1 scenario") {
  const auto s = series1_scenario(1200);
  CHECK(s.n_q == 200);
  CHECK(s.n_p == 1200);
  CHECK(s.noise_sd == doctest::Approx(1.0 / 3.0));
  CHECK(s.f(0.5) - s.g(0.5) == doctest::Approx(0.05));
  CHECK(s.f(0.0) == doctest::Approx(0.0));
  CHECK(s.g(0.0) == doctest::Approx(0.0));
  // Spike: height 0.1 at the centre, support of width 0.2.
  auto spike = [&](double x) { return s.f(x) - s.g(x) + 0.1 * x; };
  CHECK(spike(0.5) == doctest::Approx(0.1));
  CHECK(spike(0.4) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(spike(0.6) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(spike(0.41) > 0.0);
  CHECK(spike(0.39) == doctest::Approx(0.0));
}

TEST_CASE("series2 scenario") {
  const auto s0 = series2_scenario(0.0);
  for (double x : {0.0, 0.3, 0.5, 0.9}) CHECK(s0.g(x) - s0.f(x) == doctest::Approx(-0.1 * x));
  REQUIRE(s0.bias_strength.has_value());
  CHECK(*s0.bias_strength < 1e-6);
  CHECK(s0.n_q == 200);
  CHECK(s0.n_p == 600);

  const auto s1 = series2_scenario(0.01);
  CHECK(s1.g(0.5) - s1.f(0.5) == doctest::Approx(2.95));
  const double mass = integrate([&](double x) { return s1.g(x) - s1.f(x) + 0.1 * x; }, 200000);
  CHECK(mass == doctest::Approx(0.015).epsilon(1e-3));
  CHECK_THROWS_AS(series2_scenario(-0.1), std::invalid_argument);
}

TEST_CASE("bias_strength_oracle") {
  auto zero = [](double) { return 0.0; };
  CHECK(bias_strength_oracle([](double x) { return 0.3 + 0.2 * x; }, zero, 1) < 1e-6);
  auto sin10 = [](double x) { return std::sin(10.0 * std::numbers::pi * x); };
  CHECK(bias_strength_oracle(sin10, sin10, 2) < 1e-12);
  const auto s = series2_scenario(0.02);
  CHECK(bias_strength_oracle(s.f, s.g, 1) == doctest::Approx(0.03).epsilon(0.02));
  CHECK_THROWS(bias_strength_oracle(zero, zero, 4));
  CHECK_THROWS(bias_strength_oracle(zero, zero, 1, 100));
}

TEST_CASE("bias_strength_oracle bounded by the L1 distance and monotone in l_wid") {
  double prev = -1.0;
  for (double w : {0.0, 0.005, 0.01, 0.015, 0.02, 0.05}) {
    const auto s = series2_scenario(w);
    const double l1 = integrate([&](double x) { return std::abs(s.f(x) - s.g(x)); }, 20000);
    CHECK(*s.bias_strength <= l1 + 1e-12);
    CHECK(*s.bias_strength >= prev - 1e-9);
    prev = *s.bias_strength;
  }
  const auto s1 = series1_scenario(300);
  const double l1 = integrate([&](double x) { return std::abs(s1.f(x) - s1.g(x)); }, 20000);
  CHECK(bias_strength_oracle(s1.f, s1.g, 1) <= l1);
}

TEST_CASE("integrate midpoint rule") {
  CHECK(integrate([](double x) { return x; }, 10) == doctest::Approx(0.5));
  CHECK(integrate([](double x) { return x * x; }, 10000) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK_THROWS(integrate([](double) { return 0.0; }, 0));
}

namespace {

std::vector<GridPoint> noiseless_grid() {
  Scenario s;
  s.name = "linear";
  s.f = [](double x) { return 1.0 + 2.0 * x; };
  s.g = [](double x) { return 1.0 + 2.0 * x; };
  s.noise_sd = 0.0;
  s.n_q = 60;
  s.n_p = 120;
  return {GridPoint{1.0, s}};
}

const std::vector<std::string> kAll{method::lpr_target, method::act, method::lpr_source};

}  // namespace

TEST_CASE("run_experiment noiseless exact fit") {
  const auto grid = noiseless_grid();
  const auto t = run_experiment(grid, kAll, 3, 1, 1000, MethodConfig{});
  CHECK(t.rows().size() == 9);
  for (const auto& r : t.rows()) CHECK(r.mse < 1e-6);
  CHECK_THROWS_AS(run_experiment(grid, std::vector<std::string>{"knn"}, 1, 1, 1000, MethodConfig{}),
                  std::invalid_argument);
  CHECK_THROWS(run_experiment(grid, kAll, 0, 1, 1000, MethodConfig{}));
  CHECK_THROWS(run_experiment(grid, kAll, 1, 1, 999, MethodConfig{}));
}

TEST_CASE("run_experiment determinism across thread counts") {
  std::vector<GridPoint> grid{{300.0, series1_scenario(300)}};
  const std::vector<std::string> methods{method::lpr_target, method::act};
  const auto a = run_experiment(grid, methods, 4, 42, 1000, MethodConfig{}, 1);
  const auto b = run_experiment(grid, methods, 4, 42, 1000, MethodConfig{}, 3);
  std::ostringstream sa, sb;
  a.write_raw_csv(sa);
  b.write_raw_csv(sb);
  CHECK(sa.str() == sb.str());
  const auto c = run_experiment(grid, methods, 4, 43, 1000, MethodConfig{}, 1);
  std::ostringstream sc;
  c.write_raw_csv(sc);
  CHECK(sa.str() != sc.str());
  // Rows are contiguous repetitions per method.
  for (std::size_t i = 0; i < a.rows().size(); ++i) CHECK(a.rows()[i].rep == static_cast<int>(i % 4));
}

TEST_CASE("run_experiment quadrature stability") {
  std::vector<GridPoint> grid{{300.0, series1_scenario(300)}};
  const std::vector<std::string> methods{method::act};
  const auto a = run_experiment(grid, methods, 3, 5, 2000, MethodConfig{});
  const auto b = run_experiment(grid, methods, 3, 5, 4000, MethodConfig{});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(a.rows()[i].mse - b.rows()[i].mse) < 0.01 * a.rows()[i].mse);
  }
}

TEST_CASE("ExperimentTable aggregation and CSV round trip") {
  ExperimentTable t;
  t.add({"a", 1.0, 0, 1.0});
  t.add({"a", 1.0, 1, 3.0});
  t.add({"b", 1.0, 0, 0.1 + 0.2});
  t.add({"a", 2.0, 0, 5.0});
  const auto agg = t.aggregate();
  REQUIRE(agg.size() == 3);
  CHECK(agg[0].method == "a");
  CHECK(agg[0].mean_mse == 2.0);
  CHECK(agg[0].std_error == doctest::Approx(1.0));
  CHECK(agg[0].n_reps == 2);
  CHECK(agg[1].std_error == 0.0);
  CHECK(t.find("a", 2.0)->mean_mse == 5.0);
  CHECK(!t.find("c", 1.0).has_value());

  std::ostringstream raw, ag;
  t.write_raw_csv(raw);
  t.write_aggregate_csv(ag);
  const auto frame = parse_csv(raw.str());
  CHECK(frame.columns == std::vector<std::string>{"method", "param", "rep", "mse"});
  REQUIRE(frame.rows.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(parse_double(frame.rows[i][3]) == t.rows()[i].mse);
  const auto af = parse_csv(ag.str());
  CHECK(af.columns == std::vector<std::string>{"method", "param", "mean_mse", "stderr", "n_reps"});
  for (std::size_t i = 0; i < agg.size(); ++i) {
    CHECK(parse_double(af.rows[i][2]) == agg[i].mean_mse);
    CHECK(parse_double(af.rows[i][3]) == agg[i].std_error);
  }
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  parallel_for(0, 4, [&](std::size_t) { FAIL("no jobs expected"); });
}
