#include "tlreg/sim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "tlreg/csv.hpp"
#include "tlreg/detail/coordinate_descent.hpp"

namespace tlreg {

namespace {

constexpr std::uint64_t kTargetSubstream = 1;
constexpr std::uint64_t kSourceSubstream = 2;
constexpr std::uint64_t kSplitSubstream = 3;

double base_curve(double x) { return std::sin(10.0 * std::numbers::pi * x) + std::pow(x, 1.5); }

Dataset draw(const Fn1& mean, std::size_t n, double sd, RngStream& rng, DomainTag tag) {
  Dataset data(1, tag);
  data.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform();
    const double y = rng.normal(mean(x), sd);
    data.add(std::span<const double>(&x, 1), y);
  }
  return data;
}

// Weighted median minimiser of sum_k w_k |a_k t - r_k|.
double weighted_median_step(std::vector<std::pair<double, double>>& knots) {
  std::sort(knots.begin(), knots.end());
  double total = 0.0;
  for (const auto& k : knots) total += k.second;
  double acc = 0.0;
  for (const auto& k : knots) {
    acc += k.second;
    if (acc >= 0.5 * total) return k.first;
  }
  return knots.empty() ? 0.0 : knots.back().first;
}

}  // namespace

double tent(double x, double center, double height, double base_width) {
  if (base_width <= 0.0) return 0.0;
  const double slope = 2.0 * height / base_width;
  return std::max(0.0, height - slope * std::abs(x - center));
}

Scenario series1_scenario(std::size_t n_p) {
  Scenario s;
  s.name = "series1";
  s.f = [](double x) { return base_curve(x) - 0.1 * x + tent(x, 0.5, 0.1, 0.2); };
  s.g = [](double x) { return base_curve(x); };
  s.noise_sd = 1.0 / 3.0;
  s.n_q = 200;
  s.n_p = n_p;
  return s;
}

Scenario series2_scenario(double l_wid) {
  if (!(l_wid >= 0.0)) throw std::invalid_argument("series2_scenario: l_wid must be >= 0");
  Scenario s;
  s.name = "series2";
  s.f = [](double x) { return base_curve(x); };
  s.g = [l_wid](double x) { return base_curve(x) - 0.1 * x + tent(x, 0.5, 3.0, l_wid); };
  s.noise_sd = 1.0 / 3.0;
  s.n_q = 200;
  s.n_p = 600;
  s.bias_strength = bias_strength_oracle(s.f, s.g, 1);
  return s;
}

double integrate(const Fn1& h, int nodes) {
  if (nodes < 1) throw std::invalid_argument("integrate: need at least one node");
  double sum = 0.0;
  for (int k = 0; k < nodes; ++k) sum += h((k + 0.5) / nodes);
  return sum / nodes;
}

BiasStrength bias_strength_fit(const Fn1& f, const Fn1& g, int degree, int nodes) {
  if (degree < 0 || degree > 3) throw std::invalid_argument("bias_strength_oracle: degree must be in [0, 3]");
  if (nodes < 10000) throw std::invalid_argument("bias_strength_oracle: need at least 1e4 nodes");
  const std::size_t n = static_cast<std::size_t>(nodes);
  const std::size_t p = static_cast<std::size_t>(degree) + 1;
  const double w = 1.0 / nodes;

  std::vector<double> h(n), design(n * p);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = (static_cast<double>(k) + 0.5) / nodes;
    h[k] = f(x) - g(x);
    double v = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
      design[k * p + j] = v;
      v *= x;
    }
  }
  auto objective = [&](std::span<const double> c) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double psi = 0.0;
      for (std::size_t j = 0; j < p; ++j) psi += design[k * p + j] * c[j];
      s += std::abs(psi - h[k]);
    }
    return s * w;
  };
  std::vector<std::pair<double, double>> knots;
  auto line_search = [&](std::size_t j, std::span<const double> c) {
    knots.clear();
    for (std::size_t k = 0; k < n; ++k) {
      const double a = design[k * p + j];
      if (a == 0.0) continue;
      double r = h[k];
      for (std::size_t i = 0; i < p; ++i) {
        if (i != j) r -= design[k * p + i] * c[i];
      }
      knots.emplace_back(r / a, std::abs(a));
    }
    return std::pair<double, double>{weighted_median_step(knots), 0.0};
  };

  // Starts: zero, least squares, and three seeded perturbations of it.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(
      design.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  Eigen::Map<const Eigen::VectorXd> hv(h.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd ls = Eigen::MatrixXd(a).colPivHouseholderQr().solve(hv);
  std::vector<std::vector<double>> starts;
  starts.emplace_back(p, 0.0);
  starts.emplace_back(ls.data(), ls.data() + p);
  RngStream rng(0x0b1a5, 0);
  for (int s = 0; s < 3; ++s) {
    std::vector<double> c(ls.data(), ls.data() + p);
    for (auto& v : c) v += rng.normal(0.0, 0.1 * (1.0 + std::abs(v)));
    starts.push_back(std::move(c));
  }

  constexpr double kBox = 1e6;
  BiasStrength best;
  best.value = std::numeric_limits<double>::infinity();
  for (auto& c : starts) {
    const auto r = detail::coordinate_descent(c, kBox, line_search, objective, 1e-14, 200);
    if (r.loss < best.value) {
      best.value = r.loss;
      best.coefficients = c;
    }
  }
  return best;
}

double bias_strength_oracle(const Fn1& f, const Fn1& g, int degree, int nodes) {
  return bias_strength_fit(f, g, degree, nodes).value;
}

std::vector<AggregateRow> ExperimentTable::aggregate() const {
  std::vector<AggregateRow> out;
  std::vector<std::vector<double>> samples;
  for (const auto& row : rows_) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const AggregateRow& a) { return a.method == row.method && a.param == row.param; });
    if (it == out.end()) {
      out.push_back({row.method, row.param, 0.0, 0.0, 0});
      samples.emplace_back();
      it = out.end() - 1;
    }
    samples[static_cast<std::size_t>(it - out.begin())].push_back(row.mse);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = samples[i];
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = v.size() > 1 ? var / (n - 1.0) : 0.0;
    out[i].mean_mse = mean;
    out[i].std_error = std::sqrt(var / n);
    out[i].n_reps = static_cast<int>(v.size());
  }
  return out;
}

std::optional<AggregateRow> ExperimentTable::find(const std::string& method_name, double param) const {
  for (const auto& a : aggregate()) {
    if (a.method == method_name && a.param == param) return a;
  }
  return std::nullopt;
}

void ExperimentTable::write_raw_csv(std::ostream& out) const {
  out << "method,param,rep,mse\n";
  for (const auto& r : rows_) {
    out << r.method << ',' << format_double(r.param) << ',' << r.rep << ',' << format_double(r.mse) << '\n';
  }
}

void ExperimentTable::write_aggregate_csv(std::ostream& out) const {
  out << "method,param,mean_mse,stderr,n_reps\n";
  for (const auto& a : aggregate()) {
    out << a.method << ',' << format_double(a.param) << ',' << format_double(a.mean_mse) << ','
        << format_double(a.std_error) << ',' << a.n_reps << '\n';
  }
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

ExperimentTable run_experiment(std::span<const GridPoint> grid, std::span<const std::string> methods,
                               int repetitions, std::uint64_t seed, int mse_test_points,
                               const MethodConfig& config, int threads) {
  if (repetitions < 1) throw std::invalid_argument("run_experiment: repetitions must be >= 1");
  if (mse_test_points < 1000) throw std::invalid_argument("run_experiment: need at least 1000 test points");
  for (const auto& m : methods) {
    if (m != method::lpr_target && m != method::act && m != method::lpr_source) {
      throw std::invalid_argument("run_experiment: unknown method '" + m + "'");
    }
  }

  const std::size_t reps = static_cast<std::size_t>(repetitions);
  const std::size_t n_methods = methods.size();
  std::vector<double> mse(grid.size() * reps * n_methods, 0.0);

  auto score = [&](const auto& predictor, const Fn1& truth) {
    double s = 0.0;
    for (int k = 0; k < mse_test_points; ++k) {
      const double x = (k + 0.5) / mse_test_points;
      const double e = predictor(std::span<const double>(&x, 1)) - truth(x);
      s += e * e;
    }
    return s / mse_test_points;
  };

  parallel_for(grid.size() * reps, threads, [&](std::size_t task) {
    const std::size_t gi = task / reps;
    const std::size_t r = task % reps;
    const Scenario& sc = grid[gi].scenario;
    RngStream target_rng(seed, r, kTargetSubstream);
    RngStream source_rng(seed, r, kSourceSubstream);
    const Dataset dq = draw(sc.f, sc.n_q, sc.noise_sd, target_rng, DomainTag::target());
    const Dataset dp = draw(sc.g, sc.n_p, sc.noise_sd, source_rng, DomainTag::source(1));
    const std::uint64_t split_seed = RngStream(seed, r, kSplitSubstream).engine()();

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      const std::string& m = methods[mi];
      double value = 0.0;
      if (m == method::lpr_target || m == method::lpr_source) {
        const Dataset& data = m == method::lpr_target ? dq : dp;
        const auto grid_cv = cv_bandwidth(data, config.degree, config.cv_folds, config.lpr);
        const auto model = fit_lpr(data, config.degree, grid_cv, config.lpr);
        value = score([&](std::span<const double> x) { return model.predict(x); },
                      m == method::lpr_target ? sc.f : sc.g);
      } else {
        ActOptions opts;
        opts.split_seed = split_seed;
        opts.ci_grid = config.ci_grid;
        opts.lpr = config.lpr;
        const auto model = fit_act(dq, dp, config.degree, config.ci, opts);
        value = score([&](std::span<const double> x) { return predict_act(model, x); }, sc.f);
      }
      mse[(gi * n_methods + mi) * reps + r] = value;
    }
  });

  ExperimentTable table;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      for (std::size_t r = 0; r < reps; ++r) {
        table.add({methods[mi], grid[gi].param, static_cast<int>(r), mse[(gi * n_methods + mi) * reps + r]});
      }
    }
  }
  return table;
}

}  // namespace tlreg
