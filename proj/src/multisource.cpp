#include "tlreg/multisource.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace tlreg {

ActModel fit_act_multi(const MultiSourceProblem& problem, int degree, const CiSpec& ci,
                       const ActOptions& options) {
  const Dataset& dq = problem.dq;
  if (dq.size() < 4) throw std::invalid_argument("fit_act_multi: need at least 4 target samples");
  for (const auto& s : problem.sources) {
    if (!s.empty() && s.dimension() != dq.dimension()) {
      throw std::invalid_argument("fit_act_multi: source dimension mismatch");
    }
  }

  const auto split = split_target(dq, options.split_seed);
  const std::size_t n_q1 = split.fit.size();
  const std::size_t k = problem.sources.size();

  std::vector<Dataset> sources;
  sources.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    Dataset s = problem.sources[j];
    s.set_tag(DomainTag::source(static_cast<int>(j + 1)));
    sources.push_back(std::move(s));
  }
  std::vector<Dataset> nonempty;
  for (const auto& s : sources) {
    if (!s.empty()) nonempty.push_back(s);
  }
  const Dataset pooled = nonempty.empty() ? Dataset(dq.dimension(), DomainTag::pooled())
                                          : Dataset::concat(nonempty, DomainTag::pooled());

  // Same branch rule as the single-source fit: a family whose data is smaller
  // than the target half falls back to the target half.
  auto choice = [&](const Dataset& data, DomainTag tag) {
    detail::RawChoice c;
    c.n_max = std::max(n_q1, data.size());
    if (n_q1 > data.size()) {
      c.tag = DomainTag::target();
      c.data = &split.fit;
    } else {
      c.tag = tag;
      c.data = &data;
    }
    return c;
  };

  std::vector<detail::RawChoice> raws;
  for (const auto& s : sources) raws.push_back(choice(s, s.tag()));
  if (k >= 1) raws.push_back(choice(pooled, DomainTag::pooled()));
  raws.push_back(detail::RawChoice{DomainTag::target(), &split.fit, n_q1});

  const auto grids = smoothness_grids(n_q1, std::max(n_q1, pooled.size()), degree);
  std::vector<double> constants = options.ci_grid;
  if (constants.empty()) constants.push_back(ci.constant);
  return detail::select_candidate(split, raws, grids, degree, ci, constants, dq.size(), options.lpr);
}

}  // namespace tlreg
