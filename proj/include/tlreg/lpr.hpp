// Partition-based local polynomial regression.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tlreg/core.hpp"

namespace tlreg {

/// How the smoothing-bias term of the confidence half-width scales with the
/// bandwidth b. `decaying` uses b^beta; `literal_inverse` uses b^-beta.
enum class BiasTerm { decaying, literal_inverse };

struct CiSpec {
  double smoothness = 1.0;
  double constant = 2.0;
  BiasTerm bias = BiasTerm::decaying;

  [[nodiscard]] CiSpec with_smoothness(double beta) const {
    CiSpec out = *this;
    out.smoothness = beta;
    return out;
  }
};

/// How each non-empty cell is solved. `min_norm` is the plain minimum-norm
/// least-squares fit. `stabilized` keeps degree k > 0 in a cell only when the
/// smallest eigenvalue of (1/(n b^d)) sum U(u_i) U(u_i)^T over the cell's local
/// monomial vectors is at least 1/ln n times that of a uniform design on the
/// cell, and otherwise lowers the degree, down to the cell mean.
/// Near-coincident samples then cannot produce huge slopes.
enum class CellSolve { min_norm, stabilized };

struct LprOptions {
  CellSolve solve = CellSolve::min_norm;
};

/// One fitted polynomial per non-empty grid cell, expressed in the cell's
/// local coordinates (x - center) / (b/2). Empty cells predict the global
/// response mean of the training data.
class PiecewisePolyModel {
 public:
  PiecewisePolyModel(GridPartition partition, int degree, std::vector<double> coefficients,
                     std::vector<char> fitted, double fallback_value, std::size_t n_train);

  [[nodiscard]] const GridPartition& partition() const { return partition_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] double fallback_value() const { return fallback_value_; }
  [[nodiscard]] std::size_t n_train() const { return n_train_; }
  [[nodiscard]] std::size_t basis_dimension() const { return basis_.size(); }

  [[nodiscard]] bool is_fitted(std::size_t linear_cell) const { return fitted_[linear_cell] != 0; }
  [[nodiscard]] std::size_t fitted_cell_count() const;
  /// Fitted polynomial of a cell in local coordinates, or nullopt when the
  /// cell had no training samples.
  [[nodiscard]] std::optional<Polynomial> cell_fit(const CellIndex& cell) const;
  /// Raw coefficient block of one cell (graded lexicographic order).
  [[nodiscard]] std::span<const double> cell_coefficients(std::size_t linear_cell) const;

  [[nodiscard]] double predict(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return predict(x); }

  /// Upper bound on the Lipschitz constant (Euclidean norm) of the cell's
  /// fitted polynomial over the cell, in original coordinates.
  [[nodiscard]] double cell_lipschitz_bound(const CellIndex& cell) const;

 private:
  GridPartition partition_;
  int degree_;
  std::vector<MultiIndex> basis_;
  std::vector<double> coefficients_;  // cell_count * basis_dimension
  std::vector<char> fitted_;
  double fallback_value_;
  std::size_t n_train_;
};

/// Grid with max(1, floor(n^(1/(2 beta + d)))) cells per axis.
GridPartition bandwidth_from_smoothness(std::size_t n, double beta, int d);

/// Cells per axis produced by bandwidth_from_smoothness.
int cells_from_smoothness(std::size_t n, double beta, int d);

PiecewisePolyModel fit_lpr(const Dataset& data, int degree, const GridPartition& partition,
                           const LprOptions& options = {});

double predict(const PiecewisePolyModel& model, std::span<const double> x);

/// Half-width of the confidence band around a local polynomial fit on n
/// samples: (C/2) sqrt(ln n) (b^beta + ln^2 n / sqrt(n b^d)).
double ci_half_width(std::size_t n, const GridPartition& partition, const CiSpec& ci, int d);

/// Largest m considered by cv_bandwidth for this sample size.
int cv_max_cells(std::size_t n, int degree, int d);

/// K-fold cross-validated grid resolution. Fold of sample i is i mod folds.
/// Ties go to the coarser grid.
GridPartition cv_bandwidth(const Dataset& data, int degree, int folds, const LprOptions& options = {});

}  // namespace tlreg
