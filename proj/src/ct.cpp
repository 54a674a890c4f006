#include "tlreg/ct.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tlreg/detail/coordinate_descent.hpp"

namespace tlreg {

namespace {

constexpr std::uint64_t kSplitSubstream = 0x5b1d;

struct Event {
  double t;
  std::size_t term;
  bool entering;  // entering the linear regime (true) or leaving it
};

struct Quadratic {
  double a = 0.0, b = 0.0, c = 0.0;
  [[nodiscard]] double operator()(double t) const { return (a * t + b) * t + c; }
};

// Exact minimiser over [-bound, bound] of the clamped loss along coordinate j.
// Each term is constant outside the interval where the clamp is inactive and
// quadratic inside it, so the section is piecewise quadratic with at most two
// knots per term.
std::pair<double, double> clamped_line_search(const PsiProblem& pr, std::span<const double> coef,
                                              std::size_t j, double e1, double bound,
                                              std::vector<Event>& events) {
  const std::size_t n = pr.size();
  const std::size_t p = coef.size();
  const double t0 = -bound;
  Quadratic f;
  events.clear();

  struct Term {
    double s, q, a, left, right;
  };
  std::vector<Term> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = pr.design.data() + i * p;
    double q = pr.raw[i] - pr.ref[i];
    for (std::size_t k = 0; k < p; ++k) {
      if (k != j) q += row[k] * coef[k];
    }
    const double s = pr.y[i] - pr.ref[i];
    const double a = row[j];
    if (a == 0.0) {
      const double r = s - std::clamp(q, -e1, e1);
      f.c += r * r;
      terms[i] = {s, q, a, 0.0, 0.0};
      continue;
    }
    const double t1 = (-e1 - q) / a;
    const double t2 = (e1 - q) / a;
    const double lo = std::min(t1, t2);
    const double hi = std::max(t1, t2);
    const double left = a > 0 ? (s + e1) * (s + e1) : (s - e1) * (s - e1);
    const double right = a > 0 ? (s - e1) * (s - e1) : (s + e1) * (s + e1);
    terms[i] = {s, q, a, left, right};
    if (t0 < lo) {
      f.c += left;
      if (lo < bound) events.push_back({lo, i, true});
      if (hi < bound) events.push_back({hi, i, false});
    } else if (t0 <= hi) {
      const double r = s - q;
      f.a += a * a;
      f.b += -2.0 * a * r;
      f.c += r * r;
      if (hi < bound) events.push_back({hi, i, false});
    } else {
      f.c += right;
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
    if (x.t != y.t) return x.t < y.t;
    if (x.term != y.term) return x.term < y.term;
    return x.entering && !y.entering;
  });

  double best_t = t0;
  double best_v = f(t0);
  auto consider = [&](double lo, double hi) {
    auto try_point = [&](double t) {
      const double v = f(t);
      if (v < best_v) {
        best_v = v;
        best_t = t;
      }
    };
    try_point(lo);
    try_point(hi);
    if (f.a > 0.0) {
      const double vertex = -f.b / (2.0 * f.a);
      if (vertex > lo && vertex < hi) try_point(vertex);
    }
  };

  double prev = t0;
  std::size_t k = 0;
  while (k < events.size()) {
    const double t = events[k].t;
    consider(prev, t);
    for (; k < events.size() && events[k].t == t; ++k) {
      const Term& term = terms[events[k].term];
      const double r = term.s - term.q;
      const double qa = term.a * term.a, qb = -2.0 * term.a * r, qc = r * r;
      if (events[k].entering) {
        f.c -= term.left;
        f.a += qa;
        f.b += qb;
        f.c += qc;
      } else {
        f.a -= qa;
        f.b -= qb;
        f.c -= qc;
        f.c += term.right;
      }
    }
    prev = t;
  }
  consider(prev, bound);
  return {best_t, best_v};
}

}  // namespace

double mu_ct(double h1, double h2, double e1) {
  if (!(e1 >= 0.0)) throw std::invalid_argument("mu_ct: e1 must be >= 0");
  const double diff = h2 - h1;
  if (std::abs(diff) <= e1) return h2;
  return diff > 0 ? h1 + e1 : h1 - e1;
}

std::vector<double> monomial_design(const Dataset& data, int degree) {
  const auto basis = multi_indices(degree, data.dimension());
  std::vector<double> design;
  design.reserve(data.size() * basis.size());
  std::vector<double> row;
  for (std::size_t i = 0; i < data.size(); ++i) {
    monomial_values(basis, data.x(i), row);
    design.insert(design.end(), row.begin(), row.end());
  }
  return design;
}

double clamped_loss(const PsiProblem& pr, std::span<const double> coef, double e1) {
  const std::size_t p = coef.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i) {
    const double* row = pr.design.data() + i * p;
    double psi = 0.0;
    for (std::size_t k = 0; k < p; ++k) psi += row[k] * coef[k];
    const double r = pr.y[i] - mu_ct(pr.ref[i], pr.raw[i] + psi, e1);
    loss += r * r;
  }
  return loss;
}

PsiFit optimize_psi(const PsiProblem& pr, double e1, double bound) {
  if (pr.size() == 0) throw std::invalid_argument("optimize_psi: empty validation set");
  if (!(bound > 0.0)) throw std::invalid_argument("optimize_psi: bound must be > 0");
  if (!(e1 >= 0.0)) throw std::invalid_argument("optimize_psi: e1 must be >= 0");
  const std::size_t n = pr.size();
  const std::size_t p = basis_size(pr.degree, pr.dimension);
  if (pr.design.size() != n * p || pr.ref.size() != n || pr.raw.size() != n) {
    throw std::invalid_argument("optimize_psi: inconsistent problem sizes");
  }

  // Least squares on the raw residuals: the exact optimum when no clamp binds.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> design(
      pr.design.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  Eigen::VectorXd resid(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) resid(static_cast<Eigen::Index>(i)) = pr.y[i] - pr.raw[i];
  Eigen::MatrixXd dense = design;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  const Eigen::VectorXd ols = svd.solve(resid);
  std::vector<double> coef(p);
  for (std::size_t k = 0; k < p; ++k) coef[k] = std::clamp(ols(static_cast<Eigen::Index>(k)), -bound, bound);

  std::vector<Event> events;
  events.reserve(2 * n);
  const auto result = detail::coordinate_descent(
      coef, bound,
      [&](std::size_t j, std::span<const double> c) { return clamped_line_search(pr, c, j, e1, bound, events); },
      [&](std::span<const double> c) { return clamped_loss(pr, c, e1); });

  PsiFit fit{Polynomial(pr.dimension, pr.degree, coef, bound), result.loss, result.initial_loss, result.sweeps};
  return fit;
}

PsiFit optimize_psi(const Evaluable& f_ref, const Evaluable& f_raw, double e1, const Dataset& validation,
                    int degree, double bound) {
  if (validation.empty()) throw std::invalid_argument("optimize_psi: empty validation set");
  std::vector<double> ref(validation.size()), raw(validation.size());
  for (std::size_t i = 0; i < validation.size(); ++i) {
    ref[i] = f_ref(validation.x(i));
    raw[i] = f_raw(validation.x(i));
  }
  const auto design = monomial_design(validation, degree);
  const PsiProblem pr{validation.responses(), ref, raw, design, validation.dimension(), degree};
  return optimize_psi(pr, e1, bound);
}

TargetSplit split_target(const Dataset& dq, std::uint64_t seed) {
  RngStream rng(seed, 0, kSplitSubstream);
  const auto perm = rng.permutation(dq.size());
  const std::size_t half = dq.size() / 2;
  std::span<const std::size_t> all(perm);
  Dataset first = dq.select(all.first(half));
  Dataset second = dq.select(all.subspan(half));
  return {std::move(first), std::move(second)};
}

double CtModel::untruncated(std::span<const double> x) const {
  return mu_ct(f_ref->predict(x), f_raw->predict(x) + psi(x), e1);
}

namespace {

std::shared_ptr<const PiecewisePolyModel> fit_shared(const Dataset& data, int degree, const GridPartition& g,
                                                     const LprOptions& lpr) {
  return std::make_shared<const PiecewisePolyModel>(fit_lpr(data, degree, g, lpr));
}

}  // namespace

CtModel fit_ct(const Dataset& dq, const Dataset& dp, double beta_q, double beta_p, int degree,
               const CiSpec& ci, std::uint64_t split_seed, const LprOptions& lpr) {
  if (dq.size() < 4) throw std::invalid_argument("fit_ct: need at least 4 target samples");
  if (degree < 0) throw std::invalid_argument("fit_ct: degree must be >= 0");
  if (!(beta_q > 0.0) || !(beta_p > 0.0)) throw std::invalid_argument("fit_ct: smoothness must be > 0");
  if (!dp.empty() && dp.dimension() != dq.dimension()) throw std::invalid_argument("fit_ct: dimension mismatch");

  const int d = dq.dimension();
  const auto split = split_target(dq, split_seed);
  const std::size_t n_q1 = split.fit.size();
  const std::size_t n_p = dp.size();
  const double beta_max = std::max(beta_q, beta_p);
  const std::size_t n_max = std::max(n_q1, n_p);

  const GridPartition raw_grid = bandwidth_from_smoothness(n_max, beta_max, d);
  const GridPartition ref_grid = bandwidth_from_smoothness(n_q1, beta_q, d);

  CtModel model{.f_ref = fit_shared(split.fit, degree, ref_grid, lpr),
                .f_raw = nullptr,
                .psi = Polynomial(d, degree),
                .e1 = ci_half_width(n_q1, ref_grid, ci.with_smoothness(beta_q), d),
                .truncation = static_cast<double>(dq.size()),
                .raw_domain = DomainTag::target(),
                .beta_q = beta_q,
                .beta_max = beta_max,
                .ci_constant = ci.constant,
                .validation_loss = 0.0};
  if (n_q1 > n_p) {
    model.f_raw = fit_shared(split.fit, degree, raw_grid, lpr);
  } else {
    model.f_raw = fit_shared(dp, degree, raw_grid, lpr);
    model.raw_domain = dp.tag().kind == DomainTag::Kind::target ? DomainTag::source(1) : dp.tag();
  }

  const double bound = std::sqrt(std::log(static_cast<double>(dq.size())));
  const auto fit = optimize_psi([&](std::span<const double> x) { return model.f_ref->predict(x); },
                                [&](std::span<const double> x) { return model.f_raw->predict(x); }, model.e1,
                                split.validation, degree, bound);
  model.psi = fit.psi;
  model.validation_loss = fit.loss;
  return model;
}

double predict_ct(const CtModel& model, std::span<const double> x) {
  return std::clamp(model.untruncated(x), -model.truncation, model.truncation);
}

}  // namespace tlreg
