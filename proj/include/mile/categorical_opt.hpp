#pragma once

#include <vector>

#include "mile/problem.hpp"
#include "mile/types.hpp"

namespace mile {

struct CategoricalSweepStats {
  int sweeps = 0;
  long candidates_tried = 0;
  long moves_accepted = 0;
  long infeasible_candidates = 0;  // profile_theta failed; candidate skipped
};

// Greedy label optimization: sweep individuals in index order, labels in
// label order, accepting the first candidate that strictly improves the
// profiled log-likelihood. Stops after a sweep with no accepted move
// (converged; the labeling is then a single-switch local maximum) or
// after max_sweeps.
FitResult stepwise_categorical_opt(const IdealLikelihoodProblem& problem,
                                   std::vector<int> labels0, int max_sweeps = 100,
                                   CategoricalSweepStats* stats = nullptr);

}  // namespace mile
