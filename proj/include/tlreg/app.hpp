// Wine-quality transfer experiment: red wine is the target, white the source.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tlreg/csv.hpp"
#include "tlreg/lpr.hpp"
#include "tlreg/sim.hpp"

namespace tlreg {

struct WineConfig {
  std::string feature = "alcohol";
  std::string response = "quality";
  std::vector<std::size_t> n_q_grid{100, 200, 300, 400};
  int degree = 1;
  CiSpec ci;
  std::vector<double> ci_grid;
  int cv_folds = 5;
  LprOptions lpr{CellSolve::stabilized};
  int threads = 0;
};

/// x -> (x - lo) / (hi - lo).
struct AffineMap {
  double lo = 0.0;
  double hi = 1.0;
  [[nodiscard]] double operator()(double x) const { return (x - lo) / (hi - lo); }
};

struct PreparedWine {
  Dataset dq_train;  // target pool; ACT splits it again for validation
  Dataset dq_test;
  Dataset dp;
  AffineMap map;
  std::vector<std::size_t> train_rows;  // indices into the red table
  std::vector<std::size_t> test_rows;
};

/// Seeded shuffle of the red rows: the first n_q form the training pool and
/// the rest the test set. The feature is min-max scaled using white plus the
/// training pool; test covariates are clipped to [0,1] after the same map.
PreparedWine prepare(const RawTable& red, const RawTable& white, const WineConfig& cfg, std::uint64_t seed,
                     std::size_t n_q);

/// Test-set prediction error of LPR (cross-validated, red only) and ACT
/// (red + white) for each n_q and repetition.
ExperimentTable run_wine(const RawTable& red, const RawTable& white, const WineConfig& cfg,
                         std::uint64_t seed, int repetitions);

}  // namespace tlreg
