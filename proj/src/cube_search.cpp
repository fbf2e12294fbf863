#include "mile/cube_search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace mile {

namespace {

struct Candidate {
  std::vector<double> point;
  std::vector<double> theta;
  double fitness = kInfeasibleLogLik;
};

}  // namespace

FitResult random_cube_search(const IdealLikelihoodProblem& problem, const CubeSearchConfig& cfg,
                             SeededGenerator& gen, CubeSearchTrace* trace) {
  const auto start = std::chrono::steady_clock::now();
  const LatentSpace& space = problem.latent_space();
  if (space.is_categorical()) {
    throw std::invalid_argument("random_cube_search: continuous latent space required");
  }
  if (!problem.has_profile_theta()) {
    throw std::invalid_argument("random_cube_search: problem must provide profile_theta");
  }
  if (cfg.population < 2) throw std::invalid_argument("random_cube_search: population too small");

  const std::size_t dim = space.dimension();
  std::vector<Interval> region =
      cfg.initial_region.empty() ? problem.latent_sampling_box() : cfg.initial_region;
  if (region.size() != dim) {
    throw std::invalid_argument("random_cube_search: initial region dimension mismatch");
  }
  for (std::size_t i = 0; i < dim; ++i) {
    const auto& b = space.bounds(i);
    region[i].lower = std::max(region[i].lower, b.lower + kBoundaryEps);
    region[i].upper = std::min(region[i].upper, b.upper - kBoundaryEps);
    if (!(region[i].lower < region[i].upper)) {
      throw std::invalid_argument(
          "random_cube_search: initial region does not intersect the latent domain");
    }
  }

  auto evaluate = [&](Candidate& c) {
    auto prof = problem.profile_theta(c.point);
    if (!prof.has_value()) {
      c.fitness = kInfeasibleLogLik;
      c.theta.clear();
      return;
    }
    c.theta = std::move(*prof);
    const double ll = problem.log_ideal_likelihood(c.theta, c.point);
    c.fitness = is_feasible_loglik(ll) ? ll : kInfeasibleLogLik;
  };

  const int pop = cfg.population;
  std::vector<Candidate> population(pop);
  for (auto& c : population) {
    c.point.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      c.point[i] = gen.uniform(region[i].lower, region[i].upper);
    }
    evaluate(c);
  }
  auto by_fitness_desc = [](const Candidate& a, const Candidate& b) {
    return a.fitness > b.fitness;
  };
  std::stable_sort(population.begin(), population.end(), by_fitness_desc);
  if (!is_feasible_loglik(population.front().fitness)) {
    throw std::runtime_error("random_cube_search: entire initial population is infeasible");
  }

  Candidate best = population.front();
  if (trace != nullptr) trace->iteration_best.push_back(best.fitness);

  const int n_keep =
      std::clamp(static_cast<int>(std::lround(pop * cfg.keep_fraction)), 1, pop - 1);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const double half_width = 1.0 / std::sqrt(static_cast<double>(it));
    std::vector<Candidate> next;
    next.reserve(pop);
    for (int e = 0; e < n_keep; ++e) next.push_back(population[e]);

    // Offspring quota per elite cube: as even as possible, remainder to
    // the best-ranked cubes, total fixed at `population`.
    const int n_offspring = pop - n_keep;
    for (int e = 0; e < n_keep; ++e) {
      const int quota = n_offspring / n_keep + (e < n_offspring % n_keep ? 1 : 0);
      const auto& centre = population[e].point;
      for (int q = 0; q < quota; ++q) {
        Candidate c;
        c.point.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) {
          const auto& b = space.bounds(i);
          const double lo = std::max(centre[i] - half_width, b.lower + kBoundaryEps);
          const double hi = std::min(centre[i] + half_width, b.upper - kBoundaryEps);
          c.point[i] = lo < hi ? gen.uniform(lo, hi) : centre[i];
        }
        evaluate(c);
        next.push_back(std::move(c));
      }
    }

    population = std::move(next);
    std::stable_sort(population.begin(), population.end(), by_fitness_desc);
    if (population.front().fitness > best.fitness) best = population.front();
    if (trace != nullptr) trace->iteration_best.push_back(population.front().fitness);
  }

  FitResult out{ParameterVector(best.theta, problem.param_domain_ptr()),
                LatentVector(best.point, problem.latent_space_ptr()),
                best.fitness,
                cfg.max_iterations,
                is_feasible_loglik(best.fitness),
                0.0};
  out.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace mile
