#include "mile/genetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace mile {

namespace {

struct Candidate {
  std::vector<double> genes;
  std::vector<double> theta;
  double fitness = kInfeasibleLogLik;
};

}  // namespace

FitResult hybrid_ga(const IdealLikelihoodProblem& problem, const GaConfig& cfg,
                    SeededGenerator& gen, GaTrace* trace) {
  const auto start = std::chrono::steady_clock::now();
  if (problem.latent_space().is_categorical()) {
    throw std::invalid_argument("hybrid_ga: continuous latent space required");
  }
  if (!problem.has_profile_theta()) {
    throw std::invalid_argument("hybrid_ga: problem must provide profile_theta");
  }
  if (cfg.population < 2) throw std::invalid_argument("hybrid_ga: population too small");

  const auto box = problem.latent_sampling_box();
  const std::size_t dim = box.size();
  const int pop = cfg.population;
  const int n_elite = std::max(1, static_cast<int>(std::lround(pop * cfg.elite_fraction)));
  const int n_fresh = static_cast<int>(std::lround(pop * cfg.elimination_fraction));
  if (n_elite + n_fresh > pop) throw std::invalid_argument("hybrid_ga: fractions exceed 1");

  auto evaluate = [&](Candidate& c) {
    auto prof = problem.profile_theta(c.genes);
    if (!prof.has_value()) {
      c.fitness = kInfeasibleLogLik;
      c.theta.clear();
      return;
    }
    c.theta = std::move(*prof);
    const double ll = problem.log_ideal_likelihood(c.theta, c.genes);
    c.fitness = is_feasible_loglik(ll) ? ll : kInfeasibleLogLik;
  };

  auto random_genes = [&]() {
    std::vector<double> g(dim);
    for (std::size_t i = 0; i < dim; ++i) g[i] = gen.uniform(box[i].lower, box[i].upper);
    return g;
  };

  std::vector<Candidate> population(pop);
  for (auto& c : population) {
    c.genes = random_genes();
    evaluate(c);
  }

  auto by_fitness_desc = [](const Candidate& a, const Candidate& b) {
    return a.fitness > b.fitness;
  };
  std::stable_sort(population.begin(), population.end(), by_fitness_desc);
  if (!is_feasible_loglik(population.front().fitness)) {
    throw std::runtime_error("hybrid_ga: entire initial population is infeasible");
  }

  Candidate best = population.front();
  if (trace != nullptr) trace->generation_best.push_back(best.fitness);

  const int n_survivors = pop - n_fresh;  // mating pool, includes the elites
  for (int g = 0; g < cfg.max_generations; ++g) {
    std::vector<Candidate> next;
    next.reserve(pop);
    for (int i = 0; i < n_elite; ++i) next.push_back(population[i]);

    for (int i = n_elite; i < pop - n_fresh; ++i) {
      const Candidate& p1 = population[gen.below(n_survivors)];
      const Candidate& p2 = population[gen.below(n_survivors)];
      Candidate child;
      child.genes.resize(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        child.genes[d] = (gen.uniform01() < 0.5) ? p1.genes[d] : p2.genes[d];
      }
      for (std::size_t d = 0; d < dim; ++d) {
        if (gen.uniform01() < cfg.mutation_rate) {
          const double width = box[d].upper - box[d].lower;
          child.genes[d] += gen.normal(0.0, cfg.mutation_scale * width);
          child.genes[d] = std::clamp(child.genes[d], box[d].lower, box[d].upper);
        }
      }
      evaluate(child);
      next.push_back(std::move(child));
    }

    for (int i = 0; i < n_fresh; ++i) {
      Candidate c;
      c.genes = random_genes();
      evaluate(c);
      next.push_back(std::move(c));
    }

    population = std::move(next);
    std::stable_sort(population.begin(), population.end(), by_fitness_desc);
    if (population.front().fitness > best.fitness) best = population.front();
    if (trace != nullptr) trace->generation_best.push_back(population.front().fitness);
  }

  FitResult out{ParameterVector(best.theta, problem.param_domain_ptr()),
                LatentVector(best.genes, problem.latent_space_ptr()),
                best.fitness,
                cfg.max_generations,
                is_feasible_loglik(best.fitness),
                0.0};
  out.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace mile
