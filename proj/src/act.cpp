#include "tlreg/act.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>

namespace tlreg {

namespace {

struct EvaluatedFit {
  std::shared_ptr<const PiecewisePolyModel> model;
  std::vector<double> at_validation;
};

class FitCache {
 public:
  FitCache(const Dataset& data, const Dataset& validation, int degree, const LprOptions& lpr)
      : data_(data), validation_(validation), degree_(degree), lpr_(lpr) {}

  const EvaluatedFit& get(int cells) {
    auto it = fits_.find(cells);
    if (it != fits_.end()) return it->second;
    EvaluatedFit fit;
    fit.model = std::make_shared<const PiecewisePolyModel>(
        fit_lpr(data_, degree_, GridPartition(data_.dimension(), cells), lpr_));
    fit.at_validation.resize(validation_.size());
    for (std::size_t i = 0; i < validation_.size(); ++i) fit.at_validation[i] = fit.model->predict(validation_.x(i));
    return fits_.emplace(cells, std::move(fit)).first->second;
  }

 private:
  const Dataset& data_;
  const Dataset& validation_;
  int degree_;
  LprOptions lpr_;
  std::map<int, EvaluatedFit> fits_;
};

std::vector<double> arithmetic_grid(double spacing_denominator, int degree) {
  const int count = static_cast<int>(std::floor((degree + 1) * spacing_denominator));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 1; k <= count; ++k) out.push_back(k / spacing_denominator);
  return out;
}

}  // namespace

SmoothnessGrids smoothness_grids(std::size_t n_q1, std::size_t n_max, int degree) {
  if (n_q1 < 2 || n_max < 2) throw std::invalid_argument("smoothness_grids: sample sizes must be >= 2");
  if (degree < 0) throw std::invalid_argument("smoothness_grids: degree must be >= 0");
  SmoothnessGrids g;
  const double ln_q1 = std::log(static_cast<double>(n_q1));
  g.n_tilde = std::min(std::log(static_cast<double>(n_max)), static_cast<double>(n_q1));
  g.s_max = arithmetic_grid(g.n_tilde, degree);
  g.s_q = arithmetic_grid(ln_q1, degree);
  return g;
}

std::vector<double> default_ci_tuning_grid() { return {0.5, 1.0, 2.0, 4.0}; }

namespace detail {

ActModel select_candidate(const TargetSplit& split, std::span<const RawChoice> raws,
                          const SmoothnessGrids& grids, int degree, const CiSpec& ci,
                          std::span<const double> ci_constants, std::size_t n_q,
                          const LprOptions& lpr) {
  const int d = split.fit.dimension();
  const std::size_t n_q1 = split.fit.size();
  const Dataset& validation = split.validation;
  const auto design = monomial_design(validation, degree);
  const double bound = std::sqrt(std::log(static_cast<double>(n_q)));
  if (grids.s_q.empty() || grids.s_max.empty()) throw std::invalid_argument("fit_act: empty smoothness grid");

  // Reference fits depend on beta_q only through the grid resolution.
  FitCache ref_cache(split.fit, validation, degree, lpr);

  ActModel best;
  bool have_best = false;
  for (const RawChoice& raw : raws) {
    FitCache raw_cache(*raw.data, validation, degree, lpr);
    for (double beta_max : grids.s_max) {
      const int raw_cells = cells_from_smoothness(raw.n_max, beta_max, d);
      const EvaluatedFit& raw_fit = raw_cache.get(raw_cells);
      for (double beta_q : grids.s_q) {
        const int ref_cells = cells_from_smoothness(n_q1, beta_q, d);
        const EvaluatedFit& ref_fit = ref_cache.get(ref_cells);
        const PsiProblem problem{validation.responses(), ref_fit.at_validation, raw_fit.at_validation,
                                 design, d, degree};
        for (double c : ci_constants) {
          CiSpec spec = ci.with_smoothness(beta_q);
          spec.constant = c;
          const double e1 = ci_half_width(n_q1, ref_fit.model->partition(), spec, d);
          PsiFit fit = optimize_psi(problem, e1, bound);
          best.candidate_losses.push_back({raw.tag, beta_q, beta_max, c, fit.loss});
          if (!have_best || fit.loss < best.validation_loss) {
            have_best = true;
            best.validation_loss = fit.loss;
            best.beta_q_star = beta_q;
            best.beta_max_star = beta_max;
            best.chosen = CtModel{.f_ref = ref_fit.model,
                                  .f_raw = raw_fit.model,
                                  .psi = std::move(fit.psi),
                                  .e1 = e1,
                                  .truncation = static_cast<double>(n_q),
                                  .raw_domain = raw.tag,
                                  .beta_q = beta_q,
                                  .beta_max = beta_max,
                                  .ci_constant = c,
                                  .validation_loss = fit.loss};
          }
        }
      }
    }
  }
  return best;
}

}  // namespace detail

ActModel fit_act(const Dataset& dq, const Dataset& dp, int degree, const CiSpec& ci,
                 const ActOptions& options) {
  if (dq.size() < 4) throw std::invalid_argument("fit_act: need at least 4 target samples");
  if (!dp.empty() && dp.dimension() != dq.dimension()) throw std::invalid_argument("fit_act: dimension mismatch");

  const auto split = split_target(dq, options.split_seed);
  const std::size_t n_q1 = split.fit.size();
  const std::size_t n_max = std::max(n_q1, dp.size());
  const auto grids = smoothness_grids(n_q1, n_max, degree);

  detail::RawChoice raw;
  raw.n_max = n_max;
  if (n_q1 > dp.size()) {
    raw.tag = DomainTag::target();
    raw.data = &split.fit;
  } else {
    raw.tag = dp.tag().kind == DomainTag::Kind::target ? DomainTag::source(1) : dp.tag();
    raw.data = &dp;
  }
  std::vector<double> constants = options.ci_grid;
  if (constants.empty()) constants.push_back(ci.constant);
  return detail::select_candidate(split, std::span<const detail::RawChoice>(&raw, 1), grids, degree, ci,
                                  constants, dq.size(), options.lpr);
}

double predict_act(const ActModel& model, std::span<const double> x) { return predict_ct(model.chosen, x); }

}  // namespace tlreg
