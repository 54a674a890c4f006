#include "tlreg/lpr.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace tlreg {

namespace {

constexpr double kRankTolerance = 1e-10;
constexpr int kMaxStackDim = 8;

// Linear cell index and local coordinates of x, without heap traffic for d <= 8.
std::size_t locate(const GridPartition& g, std::span<const double> x, std::span<double> local) {
  const int m = g.cells_per_axis();
  const double b = g.bandwidth();
  std::size_t idx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (!(xi >= 0.0 && xi <= 1.0)) {
      throw std::out_of_range("predict: coordinate " + std::to_string(xi) + " outside [0,1]");
    }
    const int a = std::min(static_cast<int>(std::floor(xi * m)), m - 1);
    idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(a);
    local[i] = std::clamp((xi - (a + 0.5) * b) / (b / 2.0), -1.0, 1.0);
  }
  return idx;
}

double eval_block(std::span<const MultiIndex> basis, std::span<const double> coef,
                  std::span<const double> u) {
  double sum = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    double v = coef[k];
    const auto& e = basis[k].exponents;
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (int p = 0; p < e[i]; ++p) v *= u[i];
    }
    sum += v;
  }
  return sum;
}

// Smallest eigenvalue of E[U(u) U(u)^T] for u uniform on [-1,1]^d, using the
// first `cols` basis functions.
double uniform_min_eigenvalue(const std::vector<MultiIndex>& basis, Eigen::Index cols) {
  Eigen::MatrixXd gram(cols, cols);
  for (Eigen::Index a = 0; a < cols; ++a) {
    for (Eigen::Index b = 0; b < cols; ++b) {
      double v = 1.0;
      const auto& ta = basis[static_cast<std::size_t>(a)].exponents;
      const auto& tb = basis[static_cast<std::size_t>(b)].exponents;
      for (std::size_t i = 0; i < ta.size(); ++i) {
        const int k = ta[i] + tb[i];
        v *= k % 2 == 0 ? 1.0 / (k + 1) : 0.0;
      }
      gram(a, b) = v;
    }
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

PiecewisePolyModel::PiecewisePolyModel(GridPartition partition, int degree,
                                       std::vector<double> coefficients, std::vector<char> fitted,
                                       double fallback_value, std::size_t n_train)
    : partition_(partition),
      degree_(degree),
      basis_(multi_indices(degree, partition.dimension())),
      coefficients_(std::move(coefficients)),
      fitted_(std::move(fitted)),
      fallback_value_(fallback_value),
      n_train_(n_train) {
  if (fitted_.size() != partition_.cell_count() ||
      coefficients_.size() != partition_.cell_count() * basis_.size()) {
    throw std::invalid_argument("PiecewisePolyModel: storage does not match partition");
  }
  if (!std::isfinite(fallback_value_)) throw std::invalid_argument("PiecewisePolyModel: non-finite fallback");
}

std::size_t PiecewisePolyModel::fitted_cell_count() const {
  return static_cast<std::size_t>(std::count(fitted_.begin(), fitted_.end(), char{1}));
}

std::optional<Polynomial> PiecewisePolyModel::cell_fit(const CellIndex& cell) const {
  const std::size_t idx = partition_.linear_index(cell);
  if (!fitted_[idx]) return std::nullopt;
  auto block = cell_coefficients(idx);
  return Polynomial(partition_.dimension(), degree_, std::vector<double>(block.begin(), block.end()));
}

std::span<const double> PiecewisePolyModel::cell_coefficients(std::size_t linear_cell) const {
  return {coefficients_.data() + linear_cell * basis_.size(), basis_.size()};
}

double PiecewisePolyModel::predict(std::span<const double> x) const {
  const int d = partition_.dimension();
  if (static_cast<int>(x.size()) != d) throw std::invalid_argument("predict: point dimension mismatch");
  std::array<double, kMaxStackDim> stack{};
  std::vector<double> heap;
  std::span<double> local;
  if (d <= kMaxStackDim) {
    local = std::span<double>(stack.data(), static_cast<std::size_t>(d));
  } else {
    heap.resize(static_cast<std::size_t>(d));
    local = heap;
  }
  const std::size_t idx = locate(partition_, x, local);
  if (!fitted_[idx]) return fallback_value_;
  return eval_block(basis_, cell_coefficients(idx), local);
}

double PiecewisePolyModel::cell_lipschitz_bound(const CellIndex& cell) const {
  const std::size_t idx = partition_.linear_index(cell);
  if (!fitted_[idx]) return 0.0;
  // |d/du_i u^t| <= t_i on [-1,1]^d; chain rule contributes 2/b.
  auto coef = cell_coefficients(idx);
  double sq = 0.0;
  for (int i = 0; i < partition_.dimension(); ++i) {
    double gi = 0.0;
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      gi += std::abs(coef[k]) * basis_[k].exponents[static_cast<std::size_t>(i)];
    }
    sq += gi * gi;
  }
  return std::sqrt(sq) * 2.0 / partition_.bandwidth();
}

int cells_from_smoothness(std::size_t n, double beta, int d) {
  if (n < 1) throw std::invalid_argument("bandwidth_from_smoothness: n must be >= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("bandwidth_from_smoothness: beta must be > 0");
  if (d < 1) throw std::invalid_argument("bandwidth_from_smoothness: d must be >= 1");
  const double v = std::pow(static_cast<double>(n), 1.0 / (2.0 * beta + d));
  // Nudge so exact integer powers that land one ulp low still floor correctly.
  const double m = std::floor(v * (1.0 + 1e-12));
  return std::max(1, static_cast<int>(m));
}

GridPartition bandwidth_from_smoothness(std::size_t n, double beta, int d) {
  return GridPartition(d, cells_from_smoothness(n, beta, d));
}

PiecewisePolyModel fit_lpr(const Dataset& data, int degree, const GridPartition& partition,
                           const LprOptions& options) {
  if (data.empty()) throw std::invalid_argument("fit_lpr: empty dataset");
  if (degree < 0) throw std::invalid_argument("fit_lpr: degree must be >= 0");
  if (data.dimension() != partition.dimension()) throw std::invalid_argument("fit_lpr: dimension mismatch");

  const int d = partition.dimension();
  const auto basis = multi_indices(degree, d);
  const std::size_t p = basis.size();
  const std::size_t cells = partition.cell_count();
  const std::size_t n = data.size();

  // Counting sort of samples by cell, keeping input order inside a cell.
  std::vector<std::size_t> cell_of_sample(n);
  std::vector<std::size_t> offsets(cells + 1, 0);
  std::vector<double> local_all(n * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> local(local_all.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    cell_of_sample[i] = locate(partition, data.x(i), local);
    ++offsets[cell_of_sample[i] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) offsets[c + 1] += offsets[c];
  std::vector<std::size_t> order(n);
  {
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t i = 0; i < n; ++i) order[cursor[cell_of_sample[i]]++] = i;
  }

  const double gram_scale = static_cast<double>(n) * std::pow(partition.bandwidth(), d);
  const double min_eigenvalue = 1.0 / std::log(std::max(static_cast<double>(n), 3.0));
  std::vector<double> coefficients(cells * p, 0.0);
  std::vector<char> fitted(cells, 0);
  std::vector<double> row;
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t begin = offsets[c];
    const std::size_t count = offsets[c + 1] - begin;
    if (count == 0) continue;
    Eigen::MatrixXd design(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(p));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(count));
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t i = order[begin + r];
      std::span<const double> local(local_all.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d));
      monomial_values(basis, local, row);
      for (std::size_t k = 0; k < p; ++k) design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = row[k];
      rhs(static_cast<Eigen::Index>(r)) = data.y(i);
    }
    // Lower-degree bases are prefixes of the graded basis.
    Eigen::Index cols = static_cast<Eigen::Index>(p);
    if (options.solve == CellSolve::stabilized) {
      for (int k = degree; k > 0; --k) {
        cols = static_cast<Eigen::Index>(basis_size(k, d));
        const auto block = design.leftCols(cols);
        const Eigen::MatrixXd gram = block.transpose() * block / gram_scale;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues()(0) >= min_eigenvalue * uniform_min_eigenvalue(basis, cols)) break;
        cols = 1;
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design.leftCols(cols), Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kRankTolerance);
    const Eigen::VectorXd sol = svd.solve(rhs);
    for (Eigen::Index k = 0; k < cols; ++k) coefficients[c * p + static_cast<std::size_t>(k)] = sol(k);
    fitted[c] = 1;
  }
  return PiecewisePolyModel(partition, degree, std::move(coefficients), std::move(fitted),
                            data.mean_response(), n);
}

double predict(const PiecewisePolyModel& model, std::span<const double> x) { return model.predict(x); }

double ci_half_width(std::size_t n, const GridPartition& partition, const CiSpec& ci, int d) {
  if (n < 2) throw std::invalid_argument("ci_half_width: need n >= 2");
  if (!(ci.smoothness > 0.0)) throw std::invalid_argument("ci_half_width: smoothness must be > 0");
  if (!(ci.constant > 0.0)) throw std::invalid_argument("ci_half_width: constant must be > 0");
  const double ln_n = std::log(static_cast<double>(n));
  const double b = partition.bandwidth();
  const double bias = ci.bias == BiasTerm::decaying ? std::pow(b, ci.smoothness) : std::pow(b, -ci.smoothness);
  const double noise = ln_n * ln_n / std::sqrt(static_cast<double>(n) * std::pow(b, d));
  return 0.5 * ci.constant * std::sqrt(ln_n) * (bias + noise);
}

int cv_max_cells(std::size_t n, int degree, int d) {
  const double per_cell = 2.0 * static_cast<double>(basis_size(degree, d));
  const double m = std::floor(std::pow(static_cast<double>(n) / per_cell, 1.0 / d) * (1.0 + 1e-12));
  return std::max(1, static_cast<int>(m));
}

GridPartition cv_bandwidth(const Dataset& data, int degree, int folds, const LprOptions& options) {
  if (folds < 2) throw std::invalid_argument("cv_bandwidth: need at least 2 folds");
  if (data.size() < static_cast<std::size_t>(folds)) {
    throw std::invalid_argument("cv_bandwidth: " + std::to_string(data.size()) +
                                " samples is too few for " + std::to_string(folds) + " folds");
  }
  const int d = data.dimension();
  const std::size_t n = data.size();
  const int max_m = cv_max_cells(n, degree, d);

  std::vector<Dataset> train, held;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> tr, te;
    for (std::size_t i = 0; i < n; ++i) (static_cast<int>(i % static_cast<std::size_t>(folds)) == f ? te : tr).push_back(i);
    train.push_back(data.select(tr));
    held.push_back(data.select(te));
  }

  int best_m = 1;
  double best_err = 0.0;
  for (int m = 1; m <= max_m; ++m) {
    const GridPartition g(d, m);
    double err = 0.0;
    for (int f = 0; f < folds; ++f) {
      const auto model = fit_lpr(train[static_cast<std::size_t>(f)], degree, g, options);
      const auto& te = held[static_cast<std::size_t>(f)];
      double sse = 0.0;
      for (std::size_t i = 0; i < te.size(); ++i) {
        const double r = te.y(i) - model.predict(te.x(i));
        sse += r * r;
      }
      err += sse / static_cast<double>(te.size());
    }
    err /= folds;
    // Ties (up to round-off) keep the coarser grid.
    if (m == 1 || err < best_err * (1.0 - 1e-10) - 1e-20) {
      best_m = m;
      best_err = err;
    }
  }
  return GridPartition(d, best_m);
}

}  // namespace tlreg
