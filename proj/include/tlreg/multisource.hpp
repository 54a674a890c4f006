// Transfer from several source domains.
#pragma once

#include <span>
#include <vector>

#include "tlreg/act.hpp"

namespace tlreg {

struct MultiSourceProblem {
  Dataset dq;
  std::vector<Dataset> sources;  // tagged source(1..K) on construction by fit_act_multi
};

/// Adaptive fit whose raw estimate may come from any single source, from all
/// sources pooled, or from the target half alone. Each family carries its own
/// offset polynomial; the overall validation minimum is kept. Candidate order
/// is sources 1..K, pooled, target, so ties keep the earliest family.
///
/// All families share the beta_max grid built from max(n_q1, sum of source
/// sizes); each family's bandwidth uses its own sample size.
ActModel fit_act_multi(const MultiSourceProblem& problem, int degree, const CiSpec& ci,
                       const ActOptions& options = {});

}  // namespace tlreg
