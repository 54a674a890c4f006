// Adaptive confidence thresholding: grid search over smoothness guesses with
// joint validation selection of the offset polynomial.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tlreg/core.hpp"
#include "tlreg/ct.hpp"
#include "tlreg/lpr.hpp"

namespace tlreg {

struct SmoothnessGrids {
  std::vector<double> s_q;    // k / ln(n_q1), k = 1..floor((l+1) ln n_q1)
  std::vector<double> s_max;  // k / n_tilde,  k = 1..floor((l+1) n_tilde)
  double n_tilde = 0.0;       // min(ln n_max, n_q1)
};

SmoothnessGrids smoothness_grids(std::size_t n_q1, std::size_t n_max, int degree);

/// Validation loss of one (raw domain, beta_q, beta_max, C) candidate.
struct CandidateLoss {
  DomainTag raw_domain;
  double beta_q = 0.0;
  double beta_max = 0.0;
  double ci_constant = 2.0;
  double loss = 0.0;
};

struct ActModel {
  CtModel chosen;
  double beta_q_star = 0.0;
  double beta_max_star = 0.0;
  double validation_loss = 0.0;
  std::vector<CandidateLoss> candidate_losses;  // in evaluation order
};

struct ActOptions {
  std::uint64_t split_seed = 0;
  /// Constants C tuned jointly with the smoothness pair. Empty means the
  /// single constant of the CiSpec.
  std::vector<double> ci_grid;
  LprOptions lpr;
};

/// CI constants offered by the command line's --tune-ci flag.
std::vector<double> default_ci_tuning_grid();

ActModel fit_act(const Dataset& dq, const Dataset& dp, int degree, const CiSpec& ci,
                 const ActOptions& options = {});

double predict_act(const ActModel& model, std::span<const double> x);

namespace detail {

/// Dataset used for the raw fit of one candidate family together with the
/// sample size that sets its bandwidth.
struct RawChoice {
  DomainTag tag;
  const Dataset* data = nullptr;
  std::size_t n_max = 0;
};

/// Runs every candidate in order: raw choices outermost, then ascending
/// beta_max, ascending beta_q and the CI constants. The first strict
/// minimum wins.
ActModel select_candidate(const TargetSplit& split, std::span<const RawChoice> raws,
                          const SmoothnessGrids& grids, int degree, const CiSpec& ci,
                          std::span<const double> ci_constants, std::size_t n_q,
                          const LprOptions& lpr = {});

}  // namespace detail

}  // namespace tlreg
