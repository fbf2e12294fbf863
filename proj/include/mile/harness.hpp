#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mile/bca.hpp"
#include "mile/cube_search.hpp"
#include "mile/rng.hpp"

namespace mile {

enum class ModelKind { kBetaBernoulli, kLogCauchy, kGmm, kBsr };
enum class MethodKind { kMile, kEm, kMom };

std::string to_string(ModelKind model);
std::string to_string(MethodKind method);
ModelKind parse_model(const std::string& key);     // throws std::invalid_argument
MethodKind parse_method(const std::string& key);   // throws std::invalid_argument
bool method_available(ModelKind model, MethodKind method);

// True-parameter layout per model:
//   beta-bernoulli  [theta]
//   log-cauchy      [mu]
//   gmm             [mu_1..K, var_1..K, pi_1..K]
//   bsr             [alpha, beta, b1, b2, a]
struct ExperimentConfig {
  ModelKind model = ModelKind::kBetaBernoulli;
  std::vector<MethodKind> methods;
  std::vector<double> true_params;
  std::size_t n = 0;          // individuals
  std::size_t m = 1;          // observations per individual (gmm: must be 1)
  std::size_t replicates = 0;
  std::uint64_t master_seed = 0;
  std::size_t workers = 0;    // 0 = hardware concurrency
  // When false, records carry no wall times so serialized output is
  // byte-identical across runs and worker counts.
  bool emit_timings = false;

  int gmm_components = 3;
  double lc_decay_rate = 0.05;
  double bsr_horizon = 1.0;

  BcaConfig bca;
  CubeSearchConfig cube;
  int gmm_max_sweeps = 100;
};

// One fitted method on one simulated replicate. Metrics that do not apply
// are NaN and serialize as empty cells: dz_* for gmm, dz_median for all
// but log-cauchy, accuracy for all but gmm, loglik for mom.
struct ReplicateRecord {
  ModelKind model = ModelKind::kBetaBernoulli;
  MethodKind method = MethodKind::kMile;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t replicate = 0;
  std::vector<double> theta;
  double loglik = 0.0;
  double dz_mean = 0.0;
  double dz_median = 0.0;
  double dz_sd = 0.0;
  double accuracy = 0.0;
  double time_ms = 0.0;
  bool converged = false;

  // Field-wise equality with NaN == NaN, so CSV round-trips compare equal.
  friend bool operator==(const ReplicateRecord& a, const ReplicateRecord& b);
};

// Runs `replicates` independent simulate+fit rounds, parallelized over
// replicates; output is a deterministic function of the config alone.
// Per-replicate failures yield records with converged=false and NaN
// estimates rather than aborting the batch. Records come back sorted by
// (method, replicate).
std::vector<ReplicateRecord> run_experiment(const ExperimentConfig& cfg);

// Per-(model, method, N, M) aggregate in the shape of the result tables.
struct SummaryRow {
  ModelKind model = ModelKind::kBetaBernoulli;
  MethodKind method = MethodKind::kMile;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t replicates = 0;
  std::size_t converged_count = 0;
  std::vector<double> est;  // per-component mean of theta
  std::vector<double> sd;   // per-component sample sd (divisor n-1)
  double dz_mean = 0.0;
  double dz_mean_sd = 0.0;
  double dz_median = 0.0;          // median of per-replicate medians (log-cauchy)
  double dz_median_boot_sd = 0.0;  // bootstrap sd, 500 resamples
  double accuracy_mean = 0.0;
  double time_mean_ms = 0.0;
};

// Aggregates records by (model, method, N, M); non-finite metric values
// are skipped per field. Throws std::invalid_argument on an empty input.
std::vector<SummaryRow> summarize(const std::vector<ReplicateRecord>& records);

double sample_mean(std::span<const double> values);
double sample_sd(std::span<const double> values);     // divisor n-1
double sample_median(std::vector<double> values);     // copies, sorts

// Standard deviation of the median over `resamples` bootstrap draws
// (resampling with replacement at full size).
double bootstrap_median_sd(std::span<const double> values, int resamples, SeededGenerator& gen);

// Columns: model,method,N,M,rep,theta_1..p,loglik,dz_mean,dz_median,dz_sd,
// accuracy,time_ms,converged. Reals carry 17 significant digits; NaN is an
// empty cell, so read(write(r)) == r. All records must share one theta
// dimension.
void write_records_csv(const std::vector<ReplicateRecord>& records, const std::string& path);
std::vector<ReplicateRecord> read_records_csv(const std::string& path);

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

// Fixed-width table for terminal output.
std::string format_summary_table(const std::vector<SummaryRow>& rows);

}  // namespace mile
