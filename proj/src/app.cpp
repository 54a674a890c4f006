#include "tlreg/app.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "tlreg/act.hpp"

namespace tlreg {

namespace {

constexpr std::uint64_t kShuffleSubstream = 7;
constexpr std::uint64_t kSplitSubstream = 8;

std::size_t require_column(const RawTable& t, const std::string& name, const char* which) {
  const int c = t.column_index(name);
  if (c < 0) throw std::invalid_argument(std::string(which) + " table has no column '" + name + "'");
  return static_cast<std::size_t>(c);
}

}  // namespace

PreparedWine prepare(const RawTable& red, const RawTable& white, const WineConfig& cfg, std::uint64_t seed,
                     std::size_t n_q) {
  const std::size_t red_x = require_column(red, cfg.feature, "red");
  const std::size_t red_y = require_column(red, cfg.response, "red");
  const std::size_t white_x = require_column(white, cfg.feature, "white");
  const std::size_t white_y = require_column(white, cfg.response, "white");
  if (n_q < 1 || n_q + 1 > red.size()) {
    throw std::invalid_argument("prepare: n_q = " + std::to_string(n_q) + " needs at least one test row among " +
                                std::to_string(red.size()) + " red rows");
  }

  RngStream rng(seed, 0, kShuffleSubstream);
  const auto perm = rng.permutation(red.size());
  PreparedWine out{Dataset(1, DomainTag::target()), Dataset(1, DomainTag::target()),
                   Dataset(1, DomainTag::source(1)), {}, {}, {}};
  out.train_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_q));
  out.test_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_q), perm.end());

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i : out.train_rows) {
    lo = std::min(lo, red.rows[i][red_x]);
    hi = std::max(hi, red.rows[i][red_x]);
  }
  for (const auto& row : white.rows) {
    lo = std::min(lo, row[white_x]);
    hi = std::max(hi, row[white_x]);
  }
  if (!(hi > lo)) throw std::invalid_argument("prepare: feature '" + cfg.feature + "' has zero range");
  out.map = {lo, hi};

  auto add = [&](Dataset& d, double raw_x, double y) {
    const double x = std::clamp(out.map(raw_x), 0.0, 1.0);
    d.add(std::span<const double>(&x, 1), y);
  };
  out.dq_train.reserve(out.train_rows.size());
  for (std::size_t i : out.train_rows) add(out.dq_train, red.rows[i][red_x], red.rows[i][red_y]);
  out.dq_test.reserve(out.test_rows.size());
  for (std::size_t i : out.test_rows) add(out.dq_test, red.rows[i][red_x], red.rows[i][red_y]);
  out.dp.reserve(white.size());
  for (const auto& row : white.rows) add(out.dp, row[white_x], row[white_y]);
  return out;
}

ExperimentTable run_wine(const RawTable& red, const RawTable& white, const WineConfig& cfg,
                         std::uint64_t seed, int repetitions) {
  if (repetitions < 1) throw std::invalid_argument("run_wine: repetitions must be >= 1");
  const std::size_t reps = static_cast<std::size_t>(repetitions);
  const std::size_t grid = cfg.n_q_grid.size();
  std::vector<double> lpr_mse(grid * reps), act_mse(grid * reps);

  parallel_for(grid * reps, cfg.threads, [&](std::size_t task) {
    const std::size_t gi = task / reps;
    const std::size_t r = task % reps;
    const std::uint64_t rep_seed = RngStream(seed, r, kShuffleSubstream).engine()();
    const auto data = prepare(red, white, cfg, rep_seed, cfg.n_q_grid[gi]);

    auto test_mse = [&](const auto& predictor) {
      double s = 0.0;
      for (std::size_t i = 0; i < data.dq_test.size(); ++i) {
        const double e = predictor(data.dq_test.x(i)) - data.dq_test.y(i);
        s += e * e;
      }
      return s / static_cast<double>(data.dq_test.size());
    };

    const int folds = std::min<int>(cfg.cv_folds, static_cast<int>(data.dq_train.size()));
    const auto lpr = fit_lpr(data.dq_train, cfg.degree, cv_bandwidth(data.dq_train, cfg.degree, folds, cfg.lpr), cfg.lpr);
    lpr_mse[task] = test_mse([&](std::span<const double> x) { return lpr.predict(x); });

    ActOptions opts;
    opts.split_seed = RngStream(seed, r, kSplitSubstream).engine()();
    opts.ci_grid = cfg.ci_grid;
    opts.lpr = cfg.lpr;
    const auto act = fit_act(data.dq_train, data.dp, cfg.degree, cfg.ci, opts);
    act_mse[task] = test_mse([&](std::span<const double> x) { return predict_act(act, x); });
  });

  ExperimentTable table;
  for (std::size_t gi = 0; gi < grid; ++gi) {
    const double param = static_cast<double>(cfg.n_q_grid[gi]);
    for (std::size_t r = 0; r < reps; ++r) table.add({method::lpr_target, param, static_cast<int>(r), lpr_mse[gi * reps + r]});
    for (std::size_t r = 0; r < reps; ++r) table.add({method::act, param, static_cast<int>(r), act_mse[gi * reps + r]});
  }
  return table;
}

}  // namespace tlreg
