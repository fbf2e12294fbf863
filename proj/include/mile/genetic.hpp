#pragma once

#include <vector>

#include "mile/problem.hpp"
#include "mile/rng.hpp"
#include "mile/types.hpp"

namespace mile {

struct GaConfig {
  int population = 100;
  int max_generations = 200;
  double elite_fraction = 0.02;        // copied unchanged each generation
  double elimination_fraction = 0.30;  // replaced by fresh random draws
  double mutation_rate = 0.05;         // per coordinate
  double mutation_scale = 0.10;        // Gaussian sd as a fraction of box width
};

struct GaTrace {
  std::vector<double> generation_best;  // non-decreasing under elitism
};

// Genetic search over continuous latent coordinates with the parameter
// block profiled out per candidate (fitness is l(profile_theta(Z), Z)).
// Deterministic given the generator state. Throws std::runtime_error when
// the whole initial population is infeasible.
FitResult hybrid_ga(const IdealLikelihoodProblem& problem, const GaConfig& cfg,
                    SeededGenerator& gen, GaTrace* trace = nullptr);

}  // namespace mile
