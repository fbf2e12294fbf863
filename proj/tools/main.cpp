// Command-line front end: simulate / fit / summarize / infer.
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mile/dataset_io.hpp"
#include "mile/harness.hpp"
#include "mile/inference.hpp"
#include "mile/log.hpp"
#include "mile/models/beta_bernoulli.hpp"
#include "mile/models/gmm.hpp"
#include "mile/models/log_cauchy.hpp"
#include "mile/models/segmented_poisson.hpp"

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::map<std::string, double> parse_kv_pairs(const std::vector<std::string>& pairs) {
  std::map<std::string, double> out;
  for (const auto& pair : pairs) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
      throw UsageError("--true-params expects key=value, got '" + pair + "'");
    }
    const std::string key = pair.substr(0, eq);
    const std::string val = pair.substr(eq + 1);
    char* end = nullptr;
    const double v = std::strtod(val.c_str(), &end);
    if (end != val.c_str() + val.size()) {
      throw UsageError("--true-params " + key + ": bad value '" + val + "'");
    }
    if (!out.emplace(key, v).second) {
      throw UsageError("--true-params: duplicate key '" + key + "'");
    }
  }
  return out;
}

double take(std::map<std::string, double>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw UsageError("--true-params: missing key '" + key + "'");
  const double v = it->second;
  kv.erase(it);
  return v;
}

std::vector<double> true_params_from_kv(mile::ModelKind model, int k,
                                        std::map<std::string, double> kv) {
  std::vector<double> out;
  switch (model) {
    case mile::ModelKind::kBetaBernoulli:
      out = {take(kv, "theta")};
      break;
    case mile::ModelKind::kLogCauchy:
      out = {take(kv, "mu")};
      break;
    case mile::ModelKind::kGmm:
      for (int j = 1; j <= k; ++j) out.push_back(take(kv, "mu" + std::to_string(j)));
      for (int j = 1; j <= k; ++j) out.push_back(take(kv, "var" + std::to_string(j)));
      for (int j = 1; j <= k; ++j) out.push_back(take(kv, "pi" + std::to_string(j)));
      break;
    case mile::ModelKind::kBsr:
      out = {take(kv, "alpha"), take(kv, "beta"), take(kv, "b1"), take(kv, "b2"), take(kv, "a")};
      break;
  }
  if (!kv.empty()) {
    throw UsageError("--true-params: unknown key '" + kv.begin()->first + "' for model " +
                     mile::to_string(model));
  }
  return out;
}

json matrix_to_json(const std::vector<double>& m, std::size_t p) {
  json rows = json::array();
  for (std::size_t i = 0; i < p; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < p; ++j) row.push_back(m[i * p + j]);
    rows.push_back(row);
  }
  return rows;
}

void write_json(const json& doc, const std::string& path) {
  if (path.empty()) {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

struct FitFlags {
  std::string model;
  std::string data_path;
  std::string method = "mile";
  std::uint64_t seed = 0;
  std::string out;
  int k = 3;
  double decay = 0.05;
  double horizon = 1.0;
};

json run_fit(const FitFlags& flags) {
  const mile::ModelKind model = mile::parse_model(flags.model);
  const mile::MethodKind method = mile::parse_method(flags.method);
  if (!mile::method_available(model, method)) {
    throw UsageError(flags.method + " not available for " + flags.model);
  }

  std::optional<double> horizon;
  if (model == mile::ModelKind::kBsr) horizon = flags.horizon;
  const mile::GroupedDataset data = mile::read_dataset_csv(flags.data_path, horizon);

  json doc;
  doc["model"] = mile::to_string(model);
  doc["method"] = mile::to_string(method);

  auto fill = [&doc](const mile::FitResult& fr) {
    doc["theta"] = fr.theta_hat.values();
    doc["z"] = fr.z_hat.values();
    doc["loglik"] = fr.loglik;
    doc["iterations"] = fr.iterations;
    doc["converged"] = fr.converged;
  };

  switch (model) {
    case mile::ModelKind::kBetaBernoulli: {
      mile::models::BetaBernoulli problem(data);
      if (method == mile::MethodKind::kMile) {
        fill(problem.fit());
      } else {
        const auto er = problem.em_fit();
        std::vector<double> z(data.n_individuals());
        for (std::size_t i = 0; i < z.size(); ++i) {
          z[i] = (er.theta + problem.successes()[i]) /
                 (2.0 * er.theta + static_cast<double>(data.obs_per_individual()));
        }
        doc["theta"] = std::vector<double>{er.theta};
        doc["z"] = z;
        doc["loglik"] = problem.marginal_loglik(er.theta);
        doc["iterations"] = er.iterations;
        doc["converged"] = er.converged;
      }
      break;
    }
    case mile::ModelKind::kLogCauchy: {
      mile::models::LogCauchy problem(data, flags.decay);
      if (method == mile::MethodKind::kMile) {
        const auto report = problem.fit();
        fill(report.fit);
        doc["edge_individuals"] = report.edge_individuals;
      } else {
        const auto mr = problem.mom_fit();
        doc["theta"] = std::vector<double>{mr.mu};
        doc["z"] = mr.z;
        doc["excluded_individuals"] = mr.excluded;
        doc["converged"] = true;
      }
      break;
    }
    case mile::ModelKind::kGmm: {
      mile::models::Gmm problem(data, flags.k);
      mile::SeededGenerator gen(flags.seed);
      if (method == mile::MethodKind::kMile) {
        const auto report = problem.fit_mile(gen);
        fill(report.fit);
        doc["sweeps"] = report.sweep.sweeps;
      } else {
        const auto er = problem.em_fit(gen);
        doc["theta"] = er.theta;
        doc["z"] = er.labels;
        doc["loglik"] = problem.marginal_loglik(er.theta);
        doc["iterations"] = er.iterations;
        doc["converged"] = er.converged;
      }
      break;
    }
    case mile::ModelKind::kBsr: {
      mile::models::SegmentedPoisson problem(data);
      mile::SeededGenerator gen(flags.seed);
      fill(problem.fit_mile(gen));
      break;
    }
  }
  return doc;
}

struct InferFlags {
  std::string model;
  std::string data_path;
  std::string fit_path;
  bool information = false;
  bool jackknife = false;
  std::string out;
  std::uint64_t seed = 0;
  int k = 3;
  double decay = 0.05;
  double horizon = 1.0;
};

json run_infer(const InferFlags& flags) {
  const mile::ModelKind model = mile::parse_model(flags.model);
  if (!flags.information && !flags.jackknife) {
    throw UsageError("infer: pass --information and/or --jackknife");
  }

  std::optional<double> horizon;
  if (model == mile::ModelKind::kBsr) horizon = flags.horizon;
  const mile::GroupedDataset data = mile::read_dataset_csv(flags.data_path, horizon);

  std::ifstream fit_in(flags.fit_path);
  if (!fit_in) throw std::runtime_error("cannot open " + flags.fit_path);
  json fit_doc = json::parse(fit_in);
  const std::vector<double> theta = fit_doc.at("theta").get<std::vector<double>>();
  const std::vector<double> z = fit_doc.at("z").get<std::vector<double>>();

  json doc;
  doc["model"] = mile::to_string(model);
  const std::size_t p = theta.size();

  if (flags.information) {
    std::unique_ptr<mile::IdealLikelihoodProblem> problem;
    switch (model) {
      case mile::ModelKind::kBetaBernoulli:
        problem = std::make_unique<mile::models::BetaBernoulli>(data);
        break;
      case mile::ModelKind::kLogCauchy:
        problem = std::make_unique<mile::models::LogCauchy>(data, flags.decay);
        break;
      case mile::ModelKind::kGmm:
        throw UsageError(
            "infer --information needs continuous latents; gmm labels are categorical");
      case mile::ModelKind::kBsr:
        problem = std::make_unique<mile::models::SegmentedPoisson>(data);
        break;
    }
    const auto info = mile::observed_information(*problem, theta, z);
    if (!info.stationary) {
      mile::log(mile::LogLevel::kWarn,
                "infer: scaled gradient max-norm " + std::to_string(info.scaled_grad_norm) +
                    " exceeds the stationarity threshold; covariances may be meaningless");
    }
    doc["stationary"] = info.stationary;
    doc["scaled_grad_norm"] = info.scaled_grad_norm;
    doc["conditional_cov"] = matrix_to_json(mile::conditional_param_cov(info), p);
    doc["given_z_cov"] = matrix_to_json(mile::given_z_param_cov(info), p);
  }

  if (flags.jackknife) {
    if (data.n_individuals() < p + 2) {
      throw UsageError("infer --jackknife: need at least " + std::to_string(p + 2) +
                       " individuals for " + std::to_string(p) + " parameters");
    }
    const std::uint64_t seed = flags.seed;
    const int k = flags.k;
    const double decay = flags.decay;
    auto refit = [model, seed, k, decay](const mile::GroupedDataset& reduced,
                                         std::span<const double> warm) -> std::vector<double> {
      switch (model) {
        case mile::ModelKind::kBetaBernoulli: {
          mile::models::BetaBernoulli prob(reduced);
          return prob.fit({}, warm[0]).theta_hat.values();
        }
        case mile::ModelKind::kLogCauchy: {
          mile::models::LogCauchy prob(reduced, decay);
          return prob.fit().fit.theta_hat.values();
        }
        case mile::ModelKind::kGmm: {
          mile::models::Gmm prob(reduced, k);
          mile::SeededGenerator gen(seed);
          return prob.fit_mile(gen).fit.theta_hat.values();
        }
        case mile::ModelKind::kBsr: {
          mile::models::SegmentedPoisson prob(reduced);
          mile::SeededGenerator gen(seed);
          return prob.fit_mile(gen).theta_hat.values();
        }
      }
      throw std::logic_error("unhandled model");
    };
    doc["jackknife_cov"] = matrix_to_json(mile::jackknife_cov(data, refit, theta), p);
  }
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint maximum-likelihood estimation over parameters and latent variables"};
  app.require_subcommand(1);

  // --- simulate ---
  auto* sim = app.add_subcommand(
      "simulate", "Run seeded simulate+fit replicates, write records CSV, print a summary");
  std::string sim_model;
  std::vector<std::string> sim_methods;
  std::size_t sim_n = 0, sim_m = 1, sim_reps = 0;
  std::uint64_t sim_seed = 0;
  std::vector<std::string> sim_true;
  std::string sim_out, sim_summary_out;
  std::size_t sim_workers = 0;
  bool sim_timings = false;
  int sim_k = 3;
  double sim_decay = 0.05, sim_horizon = 1.0;
  sim->add_option("--model", sim_model, "beta-bernoulli | log-cauchy | gmm | bsr")->required();
  sim->add_option("--method", sim_methods, "mile | em | mom (repeatable)")->required();
  sim->add_option("--n", sim_n, "individuals per replicate")->required();
  sim->add_option("--m", sim_m, "observations per individual")->capture_default_str();
  sim->add_option("--reps", sim_reps, "replicate count")->required();
  sim->add_option("--seed", sim_seed, "master seed")->capture_default_str();
  sim->add_option("--true-params", sim_true, "key=value, e.g. theta=5 (repeatable)")->required();
  sim->add_option("--out", sim_out, "records CSV path")->required();
  sim->add_option("--summary-out", sim_summary_out, "also write the summary CSV here");
  sim->add_option("--workers", sim_workers, "replicate threads; 0 = all cores")
      ->capture_default_str();
  sim->add_flag("--emit-timings", sim_timings,
                "record wall times (off by default so reruns are byte-identical)");
  sim->add_option("--k", sim_k, "gmm components")->capture_default_str();
  sim->add_option("--decay", sim_decay, "log-cauchy decay rate")->capture_default_str();
  sim->add_option("--horizon", sim_horizon, "bsr observation horizon")->capture_default_str();

  // --- fit ---
  auto* fit = app.add_subcommand("fit", "Fit one dataset, write the estimate as JSON");
  FitFlags ff;
  fit->add_option("--model", ff.model, "beta-bernoulli | log-cauchy | gmm | bsr")->required();
  fit->add_option("--data", ff.data_path, "dataset CSV")->required();
  fit->add_option("--method", ff.method, "mile | em | mom")->capture_default_str();
  fit->add_option("--seed", ff.seed, "seed for stochastic fits")->capture_default_str();
  fit->add_option("--out", ff.out, "output path (stdout when omitted)");
  fit->add_option("--k", ff.k, "gmm components")->capture_default_str();
  fit->add_option("--decay", ff.decay, "log-cauchy decay rate")->capture_default_str();
  fit->add_option("--horizon", ff.horizon, "bsr observation horizon")->capture_default_str();

  // --- summarize ---
  auto* summ = app.add_subcommand("summarize", "Aggregate a records CSV into the summary table");
  std::string summ_records, summ_out;
  summ->add_option("--records", summ_records, "records CSV from simulate")->required();
  summ->add_option("--out", summ_out, "also write the summary CSV here");

  // --- infer ---
  auto* inf = app.add_subcommand("infer", "Covariance estimates at a fitted point");
  InferFlags nf;
  inf->add_option("--model", nf.model, "beta-bernoulli | log-cauchy | gmm | bsr")->required();
  inf->add_option("--data", nf.data_path, "dataset CSV")->required();
  inf->add_option("--fit", nf.fit_path, "fit JSON produced by the fit subcommand")->required();
  inf->add_flag("--information", nf.information,
                "observed-information covariances (latent-adjusted and given-Z)");
  inf->add_flag("--jackknife", nf.jackknife, "delete-one-individual jackknife covariance");
  inf->add_option("--out", nf.out, "output path (stdout when omitted)");
  inf->add_option("--seed", nf.seed, "seed for stochastic refits")->capture_default_str();
  inf->add_option("--k", nf.k, "gmm components")->capture_default_str();
  inf->add_option("--decay", nf.decay, "log-cauchy decay rate")->capture_default_str();
  inf->add_option("--horizon", nf.horizon, "bsr observation horizon")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      mile::ExperimentConfig cfg;
      cfg.model = mile::parse_model(sim_model);
      for (const auto& m : sim_methods) cfg.methods.push_back(mile::parse_method(m));
      cfg.gmm_components = sim_k;
      cfg.true_params = true_params_from_kv(cfg.model, sim_k, parse_kv_pairs(sim_true));
      cfg.n = sim_n;
      cfg.m = sim_m;
      cfg.replicates = sim_reps;
      cfg.master_seed = sim_seed;
      cfg.workers = sim_workers;
      cfg.emit_timings = sim_timings;
      cfg.lc_decay_rate = sim_decay;
      cfg.bsr_horizon = sim_horizon;

      const auto records = mile::run_experiment(cfg);
      mile::write_records_csv(records, sim_out);
      const auto rows = mile::summarize(records);
      std::cout << mile::format_summary_table(rows);
      if (!sim_summary_out.empty()) mile::write_summary_csv(rows, sim_summary_out);
    } else if (fit->parsed()) {
      write_json(run_fit(ff), ff.out);
    } else if (summ->parsed()) {
      const auto records = mile::read_records_csv(summ_records);
      const auto rows = mile::summarize(records);
      std::cout << mile::format_summary_table(rows);
      if (!summ_out.empty()) mile::write_summary_csv(rows, summ_out);
    } else if (inf->parsed()) {
      write_json(run_infer(nf), nf.out);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
