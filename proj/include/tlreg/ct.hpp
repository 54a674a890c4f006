// Confidence thresholding: the clamp estimator, the validation fit of the
// polynomial offset, and the non-adaptive transfer estimator built from them.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "tlreg/core.hpp"
#include "tlreg/lpr.hpp"

namespace tlreg {

using Evaluable = std::function<double(std::span<const double>)>;

/// h2 clamped into [h1 - e1, h1 + e1].
double mu_ct(double h1, double h2, double e1);

/// Validation data for the offset search, with the reference and raw fits
/// already evaluated at every validation covariate. `design` is row-major
/// n x p holding the monomials x^t of Lambda(degree).
struct PsiProblem {
  std::span<const double> y;
  std::span<const double> ref;
  std::span<const double> raw;
  std::span<const double> design;
  int dimension = 1;
  int degree = 0;

  [[nodiscard]] std::size_t size() const { return y.size(); }
  [[nodiscard]] std::size_t basis_dimension() const { return design.size() / y.size(); }
};

struct PsiFit {
  Polynomial psi;
  double loss = 0.0;          // sum of squared clamped residuals
  double initial_loss = 0.0;  // loss at the box-projected least-squares start
  int sweeps = 0;
};

std::vector<double> monomial_design(const Dataset& data, int degree);

/// Sum over validation samples of (y - mu_ct(ref, raw + psi, e1))^2.
double clamped_loss(const PsiProblem& problem, std::span<const double> coef, double e1);

/// Box-constrained minimiser of the clamped validation loss: least-squares
/// start projected into [-bound, bound], then cyclic coordinate descent with
/// exact piecewise-quadratic line searches.
PsiFit optimize_psi(const PsiProblem& problem, double e1, double bound);

PsiFit optimize_psi(const Evaluable& f_ref, const Evaluable& f_raw, double e1, const Dataset& validation,
                    int degree, double bound);

struct TargetSplit {
  Dataset fit;         // first floor(n/2) after a seeded shuffle
  Dataset validation;  // the rest
};

TargetSplit split_target(const Dataset& dq, std::uint64_t seed);

struct CtModel {
  std::shared_ptr<const PiecewisePolyModel> f_ref;
  std::shared_ptr<const PiecewisePolyModel> f_raw;
  Polynomial psi{1, 0};
  double e1 = 0.0;
  double truncation = 1.0;
  DomainTag raw_domain;
  double beta_q = 0.0;
  double beta_max = 0.0;
  double ci_constant = 2.0;
  double validation_loss = 0.0;

  /// Clamped value before truncation.
  [[nodiscard]] double untruncated(std::span<const double> x) const;
};

/// Non-adaptive transfer fit for given smoothness guesses.
CtModel fit_ct(const Dataset& dq, const Dataset& dp, double beta_q, double beta_p, int degree,
               const CiSpec& ci, std::uint64_t split_seed = 0, const LprOptions& lpr = {});

double predict_ct(const CtModel& model, std::span<const double> x);

}  // namespace tlreg
