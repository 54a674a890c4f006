#include "tlreg/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace tlreg {

namespace {

constexpr double kBoundTolerance = 1e-12;

// Appends all exponent tuples of exactly `remaining` total degree over axes
// [axis, d), largest leading exponent first.
void enumerate_degree(int axis, int remaining, std::vector<int>& current,
                      std::vector<MultiIndex>& out) {
  const int d = static_cast<int>(current.size());
  if (axis == d - 1) {
    current[axis] = remaining;
    out.push_back({current});
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[axis] = e;
    enumerate_degree(axis + 1, remaining - e, current, out);
  }
  current[axis] = 0;
}

std::size_t find_index(const std::vector<MultiIndex>& basis, const MultiIndex& t) {
  auto it = std::find(basis.begin(), basis.end(), t);
  return static_cast<std::size_t>(it - basis.begin());
}

}  // namespace

int MultiIndex::total_degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

std::vector<MultiIndex> multi_indices(int degree, int dimension) {
  if (degree < 0) throw std::invalid_argument("multi_indices: degree must be >= 0");
  if (dimension < 1) throw std::invalid_argument("multi_indices: dimension must be >= 1");
  std::vector<MultiIndex> out;
  out.reserve(basis_size(degree, dimension));
  std::vector<int> current(static_cast<std::size_t>(dimension), 0);
  for (int k = 0; k <= degree; ++k) enumerate_degree(0, k, current, out);
  return out;
}

std::size_t basis_size(int degree, int dimension) {
  // C(degree + dimension, dimension), computed incrementally to stay exact.
  std::size_t result = 1;
  for (int i = 1; i <= dimension; ++i) {
    result = result * static_cast<std::size_t>(degree + i) / static_cast<std::size_t>(i);
  }
  return result;
}

void monomial_values(std::span<const MultiIndex> basis, std::span<const double> x,
                     std::vector<double>& out) {
  out.resize(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    double v = 1.0;
    const auto& e = basis[k].exponents;
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (int p = 0; p < e[i]; ++p) v *= x[i];
    }
    out[k] = v;
  }
}

Polynomial::Polynomial(int dimension, int degree_cap, std::optional<double> coeff_bound)
    : dimension_(dimension),
      degree_cap_(degree_cap),
      basis_(multi_indices(degree_cap, dimension)),
      coefficients_(basis_.size(), 0.0),
      coeff_bound_(coeff_bound) {}

Polynomial::Polynomial(int dimension, int degree_cap, std::vector<double> coefficients,
                       std::optional<double> coeff_bound)
    : dimension_(dimension),
      degree_cap_(degree_cap),
      basis_(multi_indices(degree_cap, dimension)),
      coefficients_(std::move(coefficients)),
      coeff_bound_(coeff_bound) {
  if (coefficients_.size() != basis_.size()) {
    throw std::invalid_argument("Polynomial: expected " + std::to_string(basis_.size()) +
                                " coefficients, got " + std::to_string(coefficients_.size()));
  }
  check_bound();
}

void Polynomial::check_bound() const {
  if (!coeff_bound_) return;
  for (double c : coefficients_) {
    if (!(std::abs(c) <= *coeff_bound_ + kBoundTolerance)) {
      throw std::invalid_argument("Polynomial: coefficient " + std::to_string(c) +
                                  " exceeds bound " + std::to_string(*coeff_bound_));
    }
  }
}

double Polynomial::coefficient(const MultiIndex& t) const {
  if (t.dimension() != dimension_ || t.total_degree() > degree_cap_) return 0.0;
  return coefficients_[find_index(basis_, t)];
}

void Polynomial::set_coefficient(const MultiIndex& t, double value) {
  if (t.dimension() != dimension_) throw std::invalid_argument("Polynomial: index dimension mismatch");
  if (t.total_degree() > degree_cap_) throw std::invalid_argument("Polynomial: index exceeds degree cap");
  if (coeff_bound_ && !(std::abs(value) <= *coeff_bound_ + kBoundTolerance)) {
    throw std::invalid_argument("Polynomial: coefficient exceeds bound");
  }
  coefficients_[find_index(basis_, t)] = value;
}

double Polynomial::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dimension_) {
    throw std::invalid_argument("eval_poly: point has dimension " + std::to_string(x.size()) +
                                ", polynomial has " + std::to_string(dimension_));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    if (coefficients_[k] == 0.0) continue;
    double v = coefficients_[k];
    const auto& e = basis_[k].exponents;
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (int p = 0; p < e[i]; ++p) v *= x[i];
    }
    sum += v;
  }
  return sum;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  if (a.dimension_ != b.dimension_) throw std::invalid_argument("Polynomial: dimension mismatch in sum");
  Polynomial out(a.dimension_, std::max(a.degree_cap_, b.degree_cap_));
  for (std::size_t k = 0; k < out.basis_.size(); ++k) {
    out.coefficients_[k] = a.coefficient(out.basis_[k]) + b.coefficient(out.basis_[k]);
  }
  return out;
}

double eval_poly(const Polynomial& p, std::span<const double> x) { return p(x); }

GridPartition::GridPartition(int dimension, int cells_per_axis)
    : dimension_(dimension), cells_per_axis_(cells_per_axis) {
  if (dimension < 1) throw std::invalid_argument("GridPartition: dimension must be >= 1");
  if (cells_per_axis < 1) throw std::invalid_argument("GridPartition: cells_per_axis must be >= 1");
}

std::size_t GridPartition::cell_count() const {
  std::size_t n = 1;
  for (int i = 0; i < dimension_; ++i) n *= static_cast<std::size_t>(cells_per_axis_);
  return n;
}

CellIndex GridPartition::cell_of(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dimension_) {
    throw std::invalid_argument("cell_of: point dimension mismatch");
  }
  CellIndex cell(static_cast<std::size_t>(dimension_));
  for (int i = 0; i < dimension_; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    if (!(xi >= 0.0 && xi <= 1.0)) {
      throw std::out_of_range("cell_of: coordinate " + std::to_string(xi) + " outside [0,1]");
    }
    int a = static_cast<int>(std::floor(xi * cells_per_axis_));
    cell[static_cast<std::size_t>(i)] = std::min(a, cells_per_axis_ - 1);
  }
  return cell;
}

std::size_t GridPartition::linear_index(const CellIndex& cell) const {
  std::size_t idx = 0;
  for (int a : cell) idx = idx * static_cast<std::size_t>(cells_per_axis_) + static_cast<std::size_t>(a);
  return idx;
}

std::size_t GridPartition::linear_cell_of(std::span<const double> x) const {
  return linear_index(cell_of(x));
}

std::vector<double> GridPartition::center(const CellIndex& cell) const {
  const double b = bandwidth();
  std::vector<double> c(cell.size());
  for (std::size_t i = 0; i < cell.size(); ++i) c[i] = (cell[i] + 0.5) * b;
  return c;
}

std::vector<double> GridPartition::rescale_to_cell(std::span<const double> x,
                                                   const CellIndex& cell) const {
  if (x.size() != cell.size() || static_cast<int>(x.size()) != dimension_) {
    throw std::invalid_argument("rescale_to_cell: dimension mismatch");
  }
  const double b = bandwidth();
  const double half = b / 2.0;
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lo = cell[i] * b;
    const double hi = lo + b;
    // Closure slack for points that sit on a boundary up to round-off.
    const double slack = 1e-12;
    if (x[i] < lo - slack || x[i] > hi + slack) {
      throw std::out_of_range("rescale_to_cell: point outside cell closure");
    }
    u[i] = std::clamp((x[i] - (lo + half)) / half, -1.0, 1.0);
  }
  return u;
}

std::vector<double> GridPartition::from_cell(std::span<const double> u, const CellIndex& cell) const {
  const double b = bandwidth();
  std::vector<double> x(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) x[i] = (cell[i] + 0.5) * b + (b / 2.0) * u[i];
  return x;
}

CellIndex cell_of(std::span<const double> x, const GridPartition& partition) {
  return partition.cell_of(x);
}

std::vector<double> rescale_to_cell(std::span<const double> x, const CellIndex& cell,
                                    const GridPartition& partition) {
  return partition.rescale_to_cell(x, cell);
}

std::string DomainTag::label() const {
  switch (kind) {
    case Kind::target: return "target";
    case Kind::source: return "source" + std::to_string(index);
    case Kind::pooled: return "pooled";
  }
  return "unknown";
}

Dataset::Dataset(int dimension, DomainTag tag) : dimension_(dimension), tag_(tag) {
  if (dimension < 1) throw std::invalid_argument("Dataset: dimension must be >= 1");
}

void Dataset::add(std::span<const double> x, double y) {
  if (static_cast<int>(x.size()) != dimension_) throw std::invalid_argument("Dataset: covariate dimension mismatch");
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::out_of_range("Dataset: covariate " + std::to_string(v) + " outside [0,1]");
    }
  }
  if (!std::isfinite(y)) throw std::invalid_argument("Dataset: non-finite response");
  covariates_.insert(covariates_.end(), x.begin(), x.end());
  responses_.push_back(y);
}

void Dataset::reserve(std::size_t n) {
  covariates_.reserve(n * static_cast<std::size_t>(dimension_));
  responses_.reserve(n);
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  Dataset out(dimension_, tag_);
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    auto xi = x(i);
    out.covariates_.insert(out.covariates_.end(), xi.begin(), xi.end());
    out.responses_.push_back(responses_[i]);
  }
  return out;
}

double Dataset::mean_response() const {
  if (responses_.empty()) throw std::logic_error("Dataset: mean of empty dataset");
  return std::accumulate(responses_.begin(), responses_.end(), 0.0) / static_cast<double>(responses_.size());
}

Dataset Dataset::concat(std::span<const Dataset> parts, DomainTag tag) {
  if (parts.empty()) throw std::invalid_argument("Dataset::concat: no parts");
  Dataset out(parts.front().dimension(), tag);
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.dimension() != out.dimension()) throw std::invalid_argument("Dataset::concat: dimension mismatch");
    total += p.size();
  }
  out.reserve(total);
  for (const auto& p : parts) {
    out.covariates_.insert(out.covariates_.end(), p.covariates_.begin(), p.covariates_.end());
    out.responses_.insert(out.responses_.end(), p.responses_.begin(), p.responses_.end());
  }
  return out;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t substream)
    : seed_(seed), stream_id_(stream_id) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream_id), hi(stream_id), lo(substream), hi(substream)};
  engine_.seed(seq);
}

double RngStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::normal(double mean, double sd) {
  // Always consumes a draw so that sd = 0 keeps streams aligned.
  return mean + sd * std::normal_distribution<double>(0.0, 1.0)(engine_);
}

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), engine_);
  return idx;
}

}  // namespace tlreg
