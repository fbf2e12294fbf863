#pragma once

#include <vector>

#include "mile/problem.hpp"
#include "mile/rng.hpp"
#include "mile/types.hpp"

namespace mile {

struct CubeSearchConfig {
  int population = 100;
  int max_iterations = 50;
  double keep_fraction = 0.2;  // elites whose cubes seed the next wave
  // Sampling region for the initial population; falls back to the
  // problem's latent sampling box when empty. Must intersect the domain.
  std::vector<Interval> initial_region;
};

struct CubeSearchTrace {
  std::vector<double> iteration_best;  // non-decreasing (elites are retained)
};

// Population search that resamples uniformly inside shrinking cubes
// (half-width 1/sqrt(iteration)) centred on the retained elites, cubes
// clipped to the latent domain. Fitness profiles the parameter block out,
// as in hybrid_ga. Deterministic given the generator state.
FitResult random_cube_search(const IdealLikelihoodProblem& problem, const CubeSearchConfig& cfg,
                             SeededGenerator& gen, CubeSearchTrace* trace = nullptr);

}  // namespace mile
