// Synthetic scenarios, quadrature oracles and the seeded Monte-Carlo harness.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tlreg/act.hpp"
#include "tlreg/lpr.hpp"

namespace tlreg {

using Fn1 = std::function<double(double)>;

struct Scenario {
  std::string name;
  Fn1 f;  // target mean
  Fn1 g;  // source mean
  double noise_sd = 1.0 / 3.0;
  std::size_t n_q = 200;
  std::size_t n_p = 0;
  std::optional<double> bias_strength;
};

/// Triangle (height - slope |x - center|)_+.
double tent(double x, double center, double height, double base_width);

/// Target f = sin(10 pi x) + x^1.5 - 0.1x + (0.1 - |x - 0.5|)_+,
/// source g = sin(10 pi x) + x^1.5, n_q = 200.
Scenario series1_scenario(std::size_t n_p);

/// Target f = sin(10 pi x) + x^1.5, source g = f - 0.1x plus a height-3 tent
/// of base width l_wid at 0.5; n_q = 200, n_p = 600. Stores the oracle bias
/// strength for degree 1.
Scenario series2_scenario(double l_wid);

/// Composite midpoint rule on [0,1].
double integrate(const Fn1& h, int nodes);

struct BiasStrength {
  double value = 0.0;  // achieved L1 distance, an upper bound on the true minimum
  std::vector<double> coefficients;
};

/// Approximate min over polynomials psi of degree <= degree of the L1 distance
/// between psi and f - g on [0,1], by coordinate descent with exact
/// weighted-median line searches from five starts.
BiasStrength bias_strength_fit(const Fn1& f, const Fn1& g, int degree, int nodes = 20000);
double bias_strength_oracle(const Fn1& f, const Fn1& g, int degree, int nodes = 20000);

struct ExperimentRow {
  std::string method;
  double param = 0.0;
  int rep = 0;
  double mse = 0.0;
};

struct AggregateRow {
  std::string method;
  double param = 0.0;
  double mean_mse = 0.0;
  double std_error = 0.0;
  int n_reps = 0;
};

class ExperimentTable {
 public:
  void add(ExperimentRow row) { rows_.push_back(std::move(row)); }
  [[nodiscard]] const std::vector<ExperimentRow>& rows() const { return rows_; }
  /// One row per (method, param) in first-appearance order.
  [[nodiscard]] std::vector<AggregateRow> aggregate() const;
  [[nodiscard]] std::optional<AggregateRow> find(const std::string& method, double param) const;

  void write_raw_csv(std::ostream& out) const;
  void write_aggregate_csv(std::ostream& out) const;

 private:
  std::vector<ExperimentRow> rows_;
};

namespace method {
inline constexpr const char* lpr_target = "lpr_target";
inline constexpr const char* act = "act";
inline constexpr const char* lpr_source = "lpr_source";
}  // namespace method

struct MethodConfig {
  int degree = 1;
  CiSpec ci;
  std::vector<double> ci_grid;  // empty: fixed ci.constant
  int cv_folds = 5;
  LprOptions lpr{CellSolve::stabilized};  // used by every method
};

struct GridPoint {
  double param = 0.0;
  Scenario scenario;
};

/// For every grid point and repetition r, draws uniform covariates with
/// Gaussian noise from RngStream(seed, r), fits each method and records the
/// mean squared error on mse_test_points midpoints of [0,1]. The source-only
/// baseline is scored against g, everything else against f. Repetitions run
/// on `threads` workers (0: hardware concurrency); output order is fixed.
ExperimentTable run_experiment(std::span<const GridPoint> grid, std::span<const std::string> methods,
                               int repetitions, std::uint64_t seed, int mse_test_points,
                               const MethodConfig& config, int threads = 0);

/// Runs `count` independent jobs on a small worker pool; job i writes only
/// its own output slot.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job);

}  // namespace tlreg
