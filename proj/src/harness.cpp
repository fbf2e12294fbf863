#include "mile/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>

#include "mile/models/beta_bernoulli.hpp"
#include "mile/models/gmm.hpp"
#include "mile/models/log_cauchy.hpp"
#include "mile/models/segmented_poisson.hpp"

namespace mile {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Resampling stream is fixed so summaries are deterministic.
constexpr std::uint64_t kBootstrapSeed = 0x626f6f747374726dULL;
constexpr int kBootstrapResamples = 500;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Substream 0 is data simulation; each method owns a fixed later stream so
// the requested method subset cannot shift anyone else's draws.
std::uint64_t method_stream(MethodKind method) {
  return 1 + static_cast<std::uint64_t>(method);
}

int method_rank(MethodKind method) { return static_cast<int>(method); }

bool nan_equal(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return a == b;
}

std::size_t theta_dim(const ExperimentConfig& cfg) {
  switch (cfg.model) {
    case ModelKind::kBetaBernoulli:
    case ModelKind::kLogCauchy:
      return 1;
    case ModelKind::kGmm:
      return static_cast<std::size_t>(3 * cfg.gmm_components);
    case ModelKind::kBsr:
      return 5;
  }
  throw std::logic_error("theta_dim: unhandled model");
}

ReplicateRecord blank_record(const ExperimentConfig& cfg, MethodKind method,
                             std::size_t replicate) {
  ReplicateRecord rec;
  rec.model = cfg.model;
  rec.method = method;
  rec.n = cfg.n;
  rec.m = cfg.m;
  rec.replicate = replicate;
  rec.theta.assign(theta_dim(cfg), kNaN);
  rec.loglik = kNaN;
  rec.dz_mean = kNaN;
  rec.dz_median = kNaN;
  rec.dz_sd = kNaN;
  rec.accuracy = kNaN;
  rec.time_ms = kNaN;
  rec.converged = false;
  return rec;
}

void fill_dz(ReplicateRecord& rec, std::span<const double> z_hat,
             std::span<const double> z_true, bool with_median) {
  std::vector<double> deltas;
  deltas.reserve(z_hat.size());
  for (std::size_t i = 0; i < z_hat.size(); ++i) {
    if (std::isnan(z_hat[i])) continue;  // individuals a method excluded
    deltas.push_back(z_hat[i] - z_true[i]);
  }
  if (deltas.empty()) return;
  rec.dz_mean = sample_mean(deltas);
  rec.dz_sd = deltas.size() > 1 ? sample_sd(deltas) : kNaN;
  if (with_median) rec.dz_median = sample_median(deltas);
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.methods.empty()) throw std::invalid_argument("config: methods must be non-empty");
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    if (!method_available(cfg.model, cfg.methods[i])) {
      throw std::invalid_argument("config: " + to_string(cfg.methods[i]) +
                                  " not available for " + to_string(cfg.model));
    }
    for (std::size_t j = i + 1; j < cfg.methods.size(); ++j) {
      if (cfg.methods[i] == cfg.methods[j]) {
        throw std::invalid_argument("config: duplicate method " + to_string(cfg.methods[i]));
      }
    }
  }
  if (cfg.n == 0) throw std::invalid_argument("config: n must be positive");
  if (cfg.m == 0) throw std::invalid_argument("config: m must be positive");
  if (cfg.replicates == 0) throw std::invalid_argument("config: replicates must be positive");
  if (cfg.model == ModelKind::kGmm) {
    if (cfg.gmm_components < 2) {
      throw std::invalid_argument("config: gmm needs at least 2 components");
    }
    if (cfg.m != 1) throw std::invalid_argument("config: gmm uses one observation per individual");
  }
  if (cfg.true_params.size() != theta_dim(cfg)) {
    throw std::invalid_argument("config: expected " + std::to_string(theta_dim(cfg)) +
                                " true parameters for " + to_string(cfg.model) + ", got " +
                                std::to_string(cfg.true_params.size()));
  }
  for (double v : cfg.true_params) {
    if (!std::isfinite(v)) throw std::invalid_argument("config: true parameters must be finite");
  }
  if (cfg.model == ModelKind::kLogCauchy && cfg.lc_decay_rate <= 0.0) {
    throw std::invalid_argument("config: decay rate must be positive");
  }
  if (cfg.model == ModelKind::kBsr && cfg.bsr_horizon <= 0.0) {
    throw std::invalid_argument("config: horizon must be positive");
  }
}

bool wants(const ExperimentConfig& cfg, MethodKind method) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), method) != cfg.methods.end();
}

void run_beta_bernoulli(const ExperimentConfig& cfg, std::size_t rep,
                        std::vector<ReplicateRecord>& out) {
  SeededGenerator data_gen = derive_substream(cfg.master_seed, rep, 0);
  auto [data, z_true] =
      models::BetaBernoulli::simulate(cfg.true_params[0], cfg.n, cfg.m, data_gen);
  models::BetaBernoulli model(data);

  if (wants(cfg, MethodKind::kMile)) {
    ReplicateRecord rec = blank_record(cfg, MethodKind::kMile, rep);
    const auto start = Clock::now();
    try {
      FitResult fr = model.fit(cfg.bca);
      rec.theta = fr.theta_hat.values();
      rec.loglik = fr.loglik;
      rec.converged = fr.converged;
      fill_dz(rec, fr.z_hat.span(), z_true, false);
    } catch (const std::exception&) {
      rec = blank_record(cfg, MethodKind::kMile, rep);
    }
    if (cfg.emit_timings) rec.time_ms = elapsed_ms(start);
    out.push_back(std::move(rec));
  }
  if (wants(cfg, MethodKind::kEm)) {
    ReplicateRecord rec = blank_record(cfg, MethodKind::kEm, rep);
    const auto start = Clock::now();
    try {
      auto er = model.em_fit();
      rec.theta = {er.theta};
      rec.loglik = model.marginal_loglik(er.theta);
      rec.converged = er.converged;
      // EM's latent estimate: posterior mean (theta + s_i) / (2 theta + M).
      std::vector<double> z_em(cfg.n);
      const auto& s = model.successes();
      for (std::size_t i = 0; i < cfg.n; ++i) {
        z_em[i] = (er.theta + s[i]) / (2.0 * er.theta + static_cast<double>(cfg.m));
      }
      fill_dz(rec, z_em, z_true, false);
    } catch (const std::exception&) {
      rec = blank_record(cfg, MethodKind::kEm, rep);
    }
    if (cfg.emit_timings) rec.time_ms = elapsed_ms(start);
    out.push_back(std::move(rec));
  }
}

void run_log_cauchy(const ExperimentConfig& cfg, std::size_t rep,
                    std::vector<ReplicateRecord>& out) {
  SeededGenerator data_gen = derive_substream(cfg.master_seed, rep, 0);
  auto [data, z_true] =
      models::LogCauchy::simulate(cfg.true_params[0], cfg.n, cfg.m, cfg.lc_decay_rate, data_gen);
  models::LogCauchy model(data, cfg.lc_decay_rate);

  if (wants(cfg, MethodKind::kMile)) {
    ReplicateRecord rec = blank_record(cfg, MethodKind::kMile, rep);
    const auto start = Clock::now();
    try {
      auto report = model.fit(cfg.bca);
      rec.theta = report.fit.theta_hat.values();
      rec.loglik = report.fit.loglik;
      rec.converged = report.fit.converged;
      fill_dz(rec, report.fit.z_hat.span(), z_true, true);
    } catch (const std::exception&) {
      rec = blank_record(cfg, MethodKind::kMile, rep);
    }
    if (cfg.emit_timings) rec.time_ms = elapsed_ms(start);
    out.push_back(std::move(rec));
  }
  if (wants(cfg, MethodKind::kMom)) {
    ReplicateRecord rec = blank_record(cfg, MethodKind::kMom, rep);
    const auto start = Clock::now();
    try {
      auto mr = model.mom_fit();
      rec.theta = {mr.mu};
      rec.converged = true;
      fill_dz(rec, mr.z, z_true, true);  // excluded individuals are NaN
    } catch (const std::exception&) {
      rec = blank_record(cfg, MethodKind::kMom, rep);
    }
    if (cfg.emit_timings) rec.time_ms = elapsed_ms(start);
    out.push_back(std::move(rec));
  }
}

void run_gmm(const ExperimentConfig& cfg, std::size_t rep, std::vector<ReplicateRecord>& out) {
  const int k = cfg.gmm_components;
  const auto kk = static_cast<std::size_t>(k);
  std::vector<double> means(cfg.true_params.begin(), cfg.true_params.begin() + kk);
  std::vector<double> vars(cfg.true_params.begin() + kk, cfg.true_params.begin() + 2 * kk);
  std::vector<double> weights(cfg.true_params.begin() + 2 * kk, cfg.true_params.end());

  SeededGenerator data_gen = derive_substream(cfg.master_seed, rep, 0);
  auto [data, z_true] = models::Gmm::simulate(means, vars, weights, cfg.n, data_gen);
  models::Gmm model(data, k);

  const bool want_mile = wants(cfg, MethodKind::kMile);
  const bool want_em = wants(cfg, MethodKind::kEm);

  auto em_record = [&](const models::Gmm::EmResult& er, double time_ms) {
    ReplicateRecord rec = blank_record(cfg, MethodKind::kEm, rep);
    rec.theta = models::canonicalize_components(er.theta, k);
    rec.loglik = model.marginal_loglik(er.theta);
    rec.converged = er.converged;
    std::vector<double> labels(er.labels.begin(), er.labels.end());
    rec.accuracy = models::label_accuracy(labels, z_true, k);
    rec.time_ms = time_ms;
    return rec;
  };

  if (want_mile) {
    SeededGenerator gen = derive_substream(cfg.master_seed, rep, method_stream(MethodKind::kMile));
    ReplicateRecord mile_rec = blank_record(cfg, MethodKind::kMile, rep);
    ReplicateRecord em_rec = blank_record(cfg, MethodKind::kEm, rep);
    const auto start = Clock::now();
    try {
      // One EM run both seeds the label sweep and is reported as the EM
      // method, so the accuracy comparison is paired.
      auto report = model.fit_mile(gen, {}, cfg.gmm_max_sweeps);
      mile_rec.theta = models::canonicalize_components(report.fit.theta_hat.values(), k);
      mile_rec.loglik = report.fit.loglik;
      mile_rec.converged = report.fit.converged;
      mile_rec.accuracy = models::label_accuracy(report.fit.z_hat.span(), z_true, k);
      if (want_em) em_rec = em_record(report.em, kNaN);
    } catch (const std::exception&) {
      mile_rec = blank_record(cfg, MethodKind::kMile, rep);
      em_rec = blank_record(cfg, MethodKind::kEm, rep);
    }
    if (cfg.emit_timings) mile_rec.time_ms = elapsed_ms(start);
    out.push_back(std::move(mile_rec));
    if (want_em) out.push_back(std::move(em_rec));
  } else if (want_em) {
    SeededGenerator gen = derive_substream(cfg.master_seed, rep, method_stream(MethodKind::kEm));
    ReplicateRecord rec = blank_record(cfg, MethodKind::kEm, rep);
    const auto start = Clock::now();
    try {
      auto er = model.em_fit(gen);
      rec = em_record(er, kNaN);
    } catch (const std::exception&) {
      rec = blank_record(cfg, MethodKind::kEm, rep);
    }
    if (cfg.emit_timings) rec.time_ms = elapsed_ms(start);
    out.push_back(std::move(rec));
  }
}

void run_bsr(const ExperimentConfig& cfg, std::size_t rep, std::vector<ReplicateRecord>& out) {
  SeededGenerator data_gen = derive_substream(cfg.master_seed, rep, 0);
  auto [data, z_true] = models::SegmentedPoisson::simulate(
      cfg.true_params[0], cfg.true_params[1], cfg.true_params[2], cfg.true_params[3],
      cfg.true_params[4], cfg.n, cfg.m, cfg.bsr_horizon, data_gen);
  models::SegmentedPoisson model(data);

  ReplicateRecord rec = blank_record(cfg, MethodKind::kMile, rep);
  SeededGenerator gen = derive_substream(cfg.master_seed, rep, method_stream(MethodKind::kMile));
  const auto start = Clock::now();
  try {
    FitResult fr = model.fit_mile(gen, cfg.cube);
    rec.theta = fr.theta_hat.values();
    rec.loglik = fr.loglik;
    rec.converged = fr.converged;
    fill_dz(rec, fr.z_hat.span(), z_true, false);
  } catch (const std::exception&) {
    rec = blank_record(cfg, MethodKind::kMile, rep);
  }
  if (cfg.emit_timings) rec.time_ms = elapsed_ms(start);
  out.push_back(std::move(rec));
}

std::vector<ReplicateRecord> run_replicate(const ExperimentConfig& cfg, std::size_t rep) {
  std::vector<ReplicateRecord> out;
  try {
    switch (cfg.model) {
      case ModelKind::kBetaBernoulli:
        run_beta_bernoulli(cfg, rep, out);
        break;
      case ModelKind::kLogCauchy:
        run_log_cauchy(cfg, rep, out);
        break;
      case ModelKind::kGmm:
        run_gmm(cfg, rep, out);
        break;
      case ModelKind::kBsr:
        run_bsr(cfg, rep, out);
        break;
    }
  } catch (const std::exception&) {
    // Simulation failed: every requested method gets a failure record.
    out.clear();
    for (MethodKind meth : cfg.methods) out.push_back(blank_record(cfg, meth, rep));
  }
  return out;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& cell, std::size_t line_no) {
  if (cell.empty()) return kNaN;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size()) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": bad real '" + cell + "'");
  }
  return v;
}

std::size_t parse_count(const std::string& cell, std::size_t line_no) {
  if (cell.empty() || cell.find_first_not_of("0123456789") != std::string::npos) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": bad count '" + cell + "'");
  }
  return static_cast<std::size_t>(std::stoull(cell));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

std::string records_header(std::size_t p) {
  std::string h = "model,method,N,M,rep";
  for (std::size_t k = 1; k <= p; ++k) h += ",theta_" + std::to_string(k);
  h += ",loglik,dz_mean,dz_median,dz_sd,accuracy,time_ms,converged";
  return h;
}

}  // namespace

std::string to_string(ModelKind model) {
  switch (model) {
    case ModelKind::kBetaBernoulli:
      return "beta-bernoulli";
    case ModelKind::kLogCauchy:
      return "log-cauchy";
    case ModelKind::kGmm:
      return "gmm";
    case ModelKind::kBsr:
      return "bsr";
  }
  throw std::logic_error("to_string: unhandled model");
}

std::string to_string(MethodKind method) {
  switch (method) {
    case MethodKind::kMile:
      return "mile";
    case MethodKind::kEm:
      return "em";
    case MethodKind::kMom:
      return "mom";
  }
  throw std::logic_error("to_string: unhandled method");
}

ModelKind parse_model(const std::string& key) {
  if (key == "beta-bernoulli" || key == "bb") return ModelKind::kBetaBernoulli;
  if (key == "log-cauchy" || key == "lc") return ModelKind::kLogCauchy;
  if (key == "gmm") return ModelKind::kGmm;
  if (key == "bsr") return ModelKind::kBsr;
  throw std::invalid_argument("unknown model '" + key +
                              "' (expected beta-bernoulli, log-cauchy, gmm, or bsr)");
}

MethodKind parse_method(const std::string& key) {
  if (key == "mile") return MethodKind::kMile;
  if (key == "em") return MethodKind::kEm;
  if (key == "mom") return MethodKind::kMom;
  throw std::invalid_argument("unknown method '" + key + "' (expected mile, em, or mom)");
}

bool method_available(ModelKind model, MethodKind method) {
  switch (method) {
    case MethodKind::kMile:
      return true;
    case MethodKind::kEm:
      return model == ModelKind::kBetaBernoulli || model == ModelKind::kGmm;
    case MethodKind::kMom:
      return model == ModelKind::kLogCauchy;
  }
  return false;
}

bool operator==(const ReplicateRecord& a, const ReplicateRecord& b) {
  if (a.model != b.model || a.method != b.method || a.n != b.n || a.m != b.m ||
      a.replicate != b.replicate || a.converged != b.converged ||
      a.theta.size() != b.theta.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.theta.size(); ++k) {
    if (!nan_equal(a.theta[k], b.theta[k])) return false;
  }
  return nan_equal(a.loglik, b.loglik) && nan_equal(a.dz_mean, b.dz_mean) &&
         nan_equal(a.dz_median, b.dz_median) && nan_equal(a.dz_sd, b.dz_sd) &&
         nan_equal(a.accuracy, b.accuracy) && nan_equal(a.time_ms, b.time_ms);
}

std::vector<ReplicateRecord> run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);

  std::vector<std::vector<ReplicateRecord>> per_rep(cfg.replicates);
  std::size_t workers = cfg.workers != 0 ? cfg.workers : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, cfg.replicates);

  if (workers == 1) {
    for (std::size_t r = 0; r < cfg.replicates; ++r) per_rep[r] = run_replicate(cfg, r);
  } else {
    std::atomic<std::size_t> next{0};
    auto body = [&] {
      for (;;) {
        const std::size_t r = next.fetch_add(1);
        if (r >= cfg.replicates) break;
        per_rep[r] = run_replicate(cfg, r);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }

  std::vector<ReplicateRecord> all;
  all.reserve(cfg.replicates * cfg.methods.size());
  for (auto& batch : per_rep) {
    for (auto& rec : batch) all.push_back(std::move(rec));
  }
  std::stable_sort(all.begin(), all.end(), [](const ReplicateRecord& a, const ReplicateRecord& b) {
    if (method_rank(a.method) != method_rank(b.method)) {
      return method_rank(a.method) < method_rank(b.method);
    }
    return a.replicate < b.replicate;
  });
  return all;
}

double sample_mean(std::span<const double> values) {
  if (values.empty()) return kNaN;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return kNaN;
  const double mean = sample_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double sample_median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double bootstrap_median_sd(std::span<const double> values, int resamples, SeededGenerator& gen) {
  if (values.size() < 2) throw std::invalid_argument("bootstrap_median_sd: need >= 2 values");
  if (resamples < 2) throw std::invalid_argument("bootstrap_median_sd: need >= 2 resamples");
  std::vector<double> medians(static_cast<std::size_t>(resamples));
  std::vector<double> draw(values.size());
  for (auto& med : medians) {
    for (auto& d : draw) d = values[gen.below(values.size())];
    med = sample_median(draw);
  }
  return sample_sd(medians);
}

std::vector<SummaryRow> summarize(const std::vector<ReplicateRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");

  using Key = std::tuple<int, int, std::size_t, std::size_t>;
  std::map<Key, std::vector<const ReplicateRecord*>> groups;
  for (const auto& rec : records) {
    groups[{static_cast<int>(rec.model), method_rank(rec.method), rec.n, rec.m}].push_back(&rec);
  }

  auto finite = [](std::vector<double> v) {
    std::erase_if(v, [](double x) { return !std::isfinite(x); });
    return v;
  };

  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    SummaryRow row;
    row.model = static_cast<ModelKind>(std::get<0>(key));
    row.method = static_cast<MethodKind>(std::get<1>(key));
    row.n = std::get<2>(key);
    row.m = std::get<3>(key);
    row.replicates = members.size();

    const std::size_t p = members.front()->theta.size();
    for (const auto* rec : members) {
      if (rec->theta.size() != p) {
        throw std::invalid_argument("summarize: mixed parameter dimensions in one group");
      }
      if (rec->converged) ++row.converged_count;
    }
    row.est.assign(p, kNaN);
    row.sd.assign(p, kNaN);
    for (std::size_t k = 0; k < p; ++k) {
      std::vector<double> comp;
      comp.reserve(members.size());
      for (const auto* rec : members) comp.push_back(rec->theta[k]);
      comp = finite(std::move(comp));
      row.est[k] = sample_mean(comp);
      row.sd[k] = sample_sd(comp);
    }

    auto collect = [&](double ReplicateRecord::*field) {
      std::vector<double> v;
      v.reserve(members.size());
      for (const auto* rec : members) v.push_back(rec->*field);
      return finite(std::move(v));
    };
    const auto dz_means = collect(&ReplicateRecord::dz_mean);
    row.dz_mean = sample_mean(dz_means);
    row.dz_mean_sd = sample_sd(dz_means);

    const auto dz_medians = collect(&ReplicateRecord::dz_median);
    row.dz_median = kNaN;
    row.dz_median_boot_sd = kNaN;
    if (!dz_medians.empty()) {
      row.dz_median = sample_median(dz_medians);
      if (dz_medians.size() > 1) {
        SeededGenerator gen(kBootstrapSeed);
        row.dz_median_boot_sd = bootstrap_median_sd(dz_medians, kBootstrapResamples, gen);
      }
    }

    row.accuracy_mean = sample_mean(collect(&ReplicateRecord::accuracy));
    row.time_mean_ms = sample_mean(collect(&ReplicateRecord::time_ms));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_records_csv(const std::vector<ReplicateRecord>& records, const std::string& path) {
  const std::size_t p = records.empty() ? 0 : records.front().theta.size();
  for (const auto& rec : records) {
    if (rec.theta.size() != p) {
      throw std::invalid_argument("write_records_csv: mixed parameter dimensions");
    }
  }
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw std::runtime_error("write_records_csv: cannot open " + path);
  out << records_header(p) << '\n';
  for (const auto& rec : records) {
    out << to_string(rec.model) << ',' << to_string(rec.method) << ',' << rec.n << ',' << rec.m
        << ',' << rec.replicate;
    for (double v : rec.theta) out << ',' << format_real(v);
    out << ',' << format_real(rec.loglik) << ',' << format_real(rec.dz_mean) << ','
        << format_real(rec.dz_median) << ',' << format_real(rec.dz_sd) << ','
        << format_real(rec.accuracy) << ',' << format_real(rec.time_ms) << ','
        << (rec.converged ? '1' : '0') << '\n';
  }
  if (!out) throw std::runtime_error("write_records_csv: write failed for " + path);
}

std::vector<ReplicateRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_records_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_records_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_line(line);
  // Shape: 5 leading keys, p theta columns, 7 trailing metrics.
  if (header.size() < 12) throw std::runtime_error("line 1: header too short");
  const std::size_t p = header.size() - 12;
  if (records_header(p) != line) {
    throw std::runtime_error("line 1: unexpected header '" + line + "'");
  }

  std::vector<ReplicateRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " columns, got " +
                               std::to_string(cells.size()));
    }
    ReplicateRecord rec;
    try {
      rec.model = parse_model(cells[0]);
      rec.method = parse_method(cells[1]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
    }
    rec.n = parse_count(cells[2], line_no);
    rec.m = parse_count(cells[3], line_no);
    rec.replicate = parse_count(cells[4], line_no);
    rec.theta.resize(p);
    for (std::size_t k = 0; k < p; ++k) rec.theta[k] = parse_real(cells[5 + k], line_no);
    rec.loglik = parse_real(cells[5 + p], line_no);
    rec.dz_mean = parse_real(cells[6 + p], line_no);
    rec.dz_median = parse_real(cells[7 + p], line_no);
    rec.dz_sd = parse_real(cells[8 + p], line_no);
    rec.accuracy = parse_real(cells[9 + p], line_no);
    rec.time_ms = parse_real(cells[10 + p], line_no);
    const std::string& conv = cells[11 + p];
    if (conv == "1") {
      rec.converged = true;
    } else if (conv == "0") {
      rec.converged = false;
    } else {
      throw std::runtime_error("line " + std::to_string(line_no) + ": bad converged flag '" +
                               conv + "'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  const std::size_t p = rows.empty() ? 0 : rows.front().est.size();
  for (const auto& row : rows) {
    if (row.est.size() != p || row.sd.size() != p) {
      throw std::invalid_argument("write_summary_csv: mixed parameter dimensions");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_summary_csv: cannot open " + path);
  out << "model,method,N,M,replicates,converged";
  for (std::size_t k = 1; k <= p; ++k) out << ",est_" << k;
  for (std::size_t k = 1; k <= p; ++k) out << ",sd_" << k;
  out << ",dz_mean,dz_mean_sd,dz_median,dz_median_sd,accuracy,time_ms\n";
  for (const auto& row : rows) {
    out << to_string(row.model) << ',' << to_string(row.method) << ',' << row.n << ',' << row.m
        << ',' << row.replicates << ',' << row.converged_count;
    for (double v : row.est) out << ',' << format_real(v);
    for (double v : row.sd) out << ',' << format_real(v);
    out << ',' << format_real(row.dz_mean) << ',' << format_real(row.dz_mean_sd) << ','
        << format_real(row.dz_median) << ',' << format_real(row.dz_median_boot_sd) << ','
        << format_real(row.accuracy_mean) << ',' << format_real(row.time_mean_ms) << '\n';
  }
  if (!out) throw std::runtime_error("write_summary_csv: write failed for " + path);
}

std::string format_summary_table(const std::vector<SummaryRow>& rows) {
  auto fmt = [](double v) {
    if (std::isnan(v)) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  auto join = [&](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) s += ' ';
      s += fmt(v[i]);
    }
    return s.empty() ? std::string("-") : s;
  };

  std::vector<std::vector<std::string>> table;
  table.push_back({"model", "method", "N", "M", "reps", "conv", "est", "sd", "dz_mean",
                   "dz_median", "accuracy", "time_ms"});
  for (const auto& row : rows) {
    table.push_back({to_string(row.model), to_string(row.method), std::to_string(row.n),
                     std::to_string(row.m), std::to_string(row.replicates),
                     std::to_string(row.converged_count), join(row.est), join(row.sd),
                     fmt(row.dz_mean), fmt(row.dz_median), fmt(row.accuracy_mean),
                     fmt(row.time_mean_ms)});
  }

  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& r : table) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  for (const auto& r : table) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c > 0) out << "  ";
      out << r[c] << std::string(width[c] - r[c].size(), ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mile
