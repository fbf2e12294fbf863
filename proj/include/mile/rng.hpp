#pragma once

#include <cstdint>
#include <span>

namespace mile {

// Counter-based 64-bit generator (additive Weyl sequence pushed through an
// avalanching finalizer). Value-type: copying forks the stream. Streams
// derived for different (seed, replicate, stream) triples are independent
// of each other and of scheduling order.
class SeededGenerator {
 public:
  explicit SeededGenerator(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi);

  double normal(double mean = 0.0, double sd = 1.0);
  double gamma(double shape, double scale = 1.0);
  double beta(double a, double b);
  double cauchy(double location = 0.0, double scale = 1.0);
  double log_cauchy(double location = 0.0, double scale = 1.0);
  long poisson(double mean);
  int bernoulli(double p);

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

// Generator for one replicate of a seeded experiment; independent of how
// replicates are scheduled across workers.
SeededGenerator derive_replicate_generator(std::uint64_t master_seed,
                                           std::uint64_t replicate_index);

// Sub-stream within a replicate (one per method, per use site).
SeededGenerator derive_substream(std::uint64_t master_seed, std::uint64_t replicate_index,
                                 std::uint64_t stream);

}  // namespace mile
