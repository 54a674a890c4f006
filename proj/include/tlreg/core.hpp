// Foundational types: multi-indices, polynomials on the unit hypercube, the
// regular grid partition, datasets and seeded random streams.
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace tlreg {

/// Exponent tuple t = (t_1, ..., t_d).
struct MultiIndex {
  std::vector<int> exponents;

  [[nodiscard]] int dimension() const { return static_cast<int>(exponents.size()); }
  [[nodiscard]] int total_degree() const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// All t with |t| <= degree, graded lexicographic: grouped by total degree,
/// and inside a group larger leading exponents come first.
std::vector<MultiIndex> multi_indices(int degree, int dimension);

/// Number of multi-indices with |t| <= degree, i.e. C(degree + dimension, dimension).
std::size_t basis_size(int degree, int dimension);

/// x^t for every t of the basis, written into `out` (resized).
void monomial_values(std::span<const MultiIndex> basis, std::span<const double> x,
                     std::vector<double>& out);

/// Polynomial sum_t c_t x^t with t restricted to Lambda(degree_cap). Coefficients
/// are stored densely in the order of multi_indices(degree_cap, dimension).
class Polynomial {
 public:
  Polynomial(int dimension, int degree_cap, std::optional<double> coeff_bound = std::nullopt);
  Polynomial(int dimension, int degree_cap, std::vector<double> coefficients,
             std::optional<double> coeff_bound = std::nullopt);

  [[nodiscard]] int dimension() const { return dimension_; }
  [[nodiscard]] int degree_cap() const { return degree_cap_; }
  [[nodiscard]] const std::optional<double>& coeff_bound() const { return coeff_bound_; }
  [[nodiscard]] std::span<const double> coefficients() const { return coefficients_; }
  [[nodiscard]] const std::vector<MultiIndex>& basis() const { return basis_; }

  /// Coefficient of x^t; zero for any index outside Lambda(degree_cap).
  [[nodiscard]] double coefficient(const MultiIndex& t) const;
  void set_coefficient(const MultiIndex& t, double value);

  [[nodiscard]] double operator()(std::span<const double> x) const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void check_bound() const;

  int dimension_;
  int degree_cap_;
  std::vector<MultiIndex> basis_;
  std::vector<double> coefficients_;
  std::optional<double> coeff_bound_;
};

double eval_poly(const Polynomial& p, std::span<const double> x);

using CellIndex = std::vector<int>;

/// Regular partition of [0,1]^d into m^d half-open cubes of side b = 1/m.
/// Coordinates equal to 1 belong to the last cell along their axis.
class GridPartition {
 public:
  GridPartition(int dimension, int cells_per_axis);

  [[nodiscard]] int dimension() const { return dimension_; }
  [[nodiscard]] int cells_per_axis() const { return cells_per_axis_; }
  [[nodiscard]] double bandwidth() const { return 1.0 / cells_per_axis_; }
  [[nodiscard]] std::size_t cell_count() const;

  [[nodiscard]] CellIndex cell_of(std::span<const double> x) const;
  /// Row-major flattening of a cell index (first axis slowest).
  [[nodiscard]] std::size_t linear_index(const CellIndex& cell) const;
  [[nodiscard]] std::size_t linear_cell_of(std::span<const double> x) const;
  [[nodiscard]] std::vector<double> center(const CellIndex& cell) const;

  /// Local coordinates (x - center) / (b/2), each in [-1, 1].
  [[nodiscard]] std::vector<double> rescale_to_cell(std::span<const double> x,
                                                    const CellIndex& cell) const;
  /// Inverse of rescale_to_cell.
  [[nodiscard]] std::vector<double> from_cell(std::span<const double> u,
                                              const CellIndex& cell) const;

  friend bool operator==(const GridPartition&, const GridPartition&) = default;

 private:
  int dimension_;
  int cells_per_axis_;
};

CellIndex cell_of(std::span<const double> x, const GridPartition& partition);
std::vector<double> rescale_to_cell(std::span<const double> x, const CellIndex& cell,
                                    const GridPartition& partition);

struct DomainTag {
  enum class Kind { target, source, pooled };
  Kind kind = Kind::target;
  int index = 0;  // 1-based source index; 0 for target and pooled

  static DomainTag target() { return {Kind::target, 0}; }
  static DomainTag source(int j) { return {Kind::source, j}; }
  static DomainTag pooled() { return {Kind::pooled, 0}; }

  [[nodiscard]] std::string label() const;
  friend bool operator==(const DomainTag&, const DomainTag&) = default;
};

/// Samples (x_i, y_i) with x_i in [0,1]^d, stored row-major.
class Dataset {
 public:
  explicit Dataset(int dimension, DomainTag tag = DomainTag::target());

  void add(std::span<const double> x, double y);
  void reserve(std::size_t n);

  [[nodiscard]] int dimension() const { return dimension_; }
  [[nodiscard]] std::size_t size() const { return responses_.size(); }
  [[nodiscard]] bool empty() const { return responses_.empty(); }
  [[nodiscard]] const DomainTag& tag() const { return tag_; }
  void set_tag(DomainTag tag) { tag_ = tag; }

  [[nodiscard]] std::span<const double> x(std::size_t i) const {
    return {covariates_.data() + i * static_cast<std::size_t>(dimension_),
            static_cast<std::size_t>(dimension_)};
  }
  [[nodiscard]] double y(std::size_t i) const { return responses_[i]; }
  [[nodiscard]] std::span<const double> responses() const { return responses_; }

  /// Subset in the given index order.
  [[nodiscard]] Dataset select(std::span<const std::size_t> indices) const;
  [[nodiscard]] double mean_response() const;

  static Dataset concat(std::span<const Dataset> parts, DomainTag tag);

 private:
  int dimension_;
  DomainTag tag_;
  std::vector<double> covariates_;
  std::vector<double> responses_;
};

/// Deterministic random stream keyed by (seed, stream_id, substream). The
/// generator state depends only on the key, never on scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t substream = 0);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

  double uniform();  // [0, 1)
  double normal(double mean, double sd);
  std::mt19937_64& engine() { return engine_; }

  /// Uniformly shuffled 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace tlreg
