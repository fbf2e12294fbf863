// Python surface: special functions, per-model simulate/fit, the Monte
// Carlo driver, and the resampling helper. Datasets cross the boundary as
// nested lists; estimates come back as dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>
#include <vector>

#include "mile/harness.hpp"
#include "mile/models/beta_bernoulli.hpp"
#include "mile/models/gmm.hpp"
#include "mile/models/log_cauchy.hpp"
#include "mile/models/segmented_poisson.hpp"
#include "mile/rng.hpp"
#include "mile/specfn.hpp"

namespace py = pybind11;

namespace {

mile::GroupedDataset make_dataset(const std::vector<std::vector<double>>& values,
                                  const std::optional<std::vector<double>>& timestamps,
                                  std::optional<double> horizon) {
  if (values.empty()) throw std::invalid_argument("values must be non-empty");
  const std::size_t m = values.front().size();
  std::vector<double> flat;
  flat.reserve(values.size() * m);
  for (const auto& row : values) {
    if (row.size() != m) {
      throw std::invalid_argument("every individual needs the same number of observations");
    }
    flat.insert(flat.end(), row.begin(), row.end());
  }
  if (timestamps.has_value()) {
    if (!horizon.has_value()) throw std::invalid_argument("timestamps require a horizon");
    return mile::GroupedDataset(values.size(), *timestamps, *horizon, std::move(flat));
  }
  return mile::GroupedDataset(values.size(), m, std::move(flat));
}

std::vector<std::vector<double>> nested(const mile::GroupedDataset& data) {
  std::vector<std::vector<double>> out(data.n_individuals());
  for (std::size_t i = 0; i < data.n_individuals(); ++i) {
    auto row = data.individual(i);
    out[i].assign(row.begin(), row.end());
  }
  return out;
}

py::dict simulate_py(const std::string& model, const std::vector<double>& true_params,
                     std::size_t n, std::size_t m, std::uint64_t seed, int k, double decay,
                     double horizon) {
  const mile::ModelKind kind = mile::parse_model(model);
  mile::SeededGenerator gen(seed);
  py::dict out;
  switch (kind) {
    case mile::ModelKind::kBetaBernoulli: {
      if (true_params.size() != 1) throw std::invalid_argument("expected [theta]");
      auto [data, z] = mile::models::BetaBernoulli::simulate(true_params[0], n, m, gen);
      out["values"] = nested(data);
      out["z_true"] = z;
      break;
    }
    case mile::ModelKind::kLogCauchy: {
      if (true_params.size() != 1) throw std::invalid_argument("expected [mu]");
      auto [data, z] = mile::models::LogCauchy::simulate(true_params[0], n, m, decay, gen);
      out["values"] = nested(data);
      out["z_true"] = z;
      break;
    }
    case mile::ModelKind::kGmm: {
      const auto kk = static_cast<std::size_t>(k);
      if (true_params.size() != 3 * kk) {
        throw std::invalid_argument("expected [mu_1..k, var_1..k, pi_1..k]");
      }
      std::vector<double> means(true_params.begin(), true_params.begin() + kk);
      std::vector<double> vars(true_params.begin() + kk, true_params.begin() + 2 * kk);
      std::vector<double> weights(true_params.begin() + 2 * kk, true_params.end());
      auto [data, z] = mile::models::Gmm::simulate(means, vars, weights, n, gen);
      out["values"] = nested(data);
      out["z_true"] = z;
      break;
    }
    case mile::ModelKind::kBsr: {
      if (true_params.size() != 5) throw std::invalid_argument("expected [alpha,beta,b1,b2,a]");
      auto [data, z] = mile::models::SegmentedPoisson::simulate(
          true_params[0], true_params[1], true_params[2], true_params[3], true_params[4], n, m,
          horizon, gen);
      out["values"] = nested(data);
      auto ts = data.timestamps();
      out["timestamps"] = std::vector<double>(ts.begin(), ts.end());
      out["horizon"] = data.horizon();
      out["z_true"] = z;
      break;
    }
  }
  return out;
}

py::dict fit_py(const std::string& model, const std::vector<std::vector<double>>& values,
                const std::string& method, std::uint64_t seed, int k, double decay,
                const std::optional<std::vector<double>>& timestamps,
                std::optional<double> horizon) {
  const mile::ModelKind kind = mile::parse_model(model);
  const mile::MethodKind meth = mile::parse_method(method);
  if (!mile::method_available(kind, meth)) {
    throw std::invalid_argument(method + " not available for " + model);
  }
  const mile::GroupedDataset data = make_dataset(values, timestamps, horizon);

  py::dict out;
  auto fill = [&out](const mile::FitResult& fr) {
    out["theta"] = fr.theta_hat.values();
    out["z"] = fr.z_hat.values();
    out["loglik"] = fr.loglik;
    out["iterations"] = fr.iterations;
    out["converged"] = fr.converged;
  };

  switch (kind) {
    case mile::ModelKind::kBetaBernoulli: {
      mile::models::BetaBernoulli problem(data);
      if (meth == mile::MethodKind::kMile) {
        fill(problem.fit());
      } else {
        const auto er = problem.em_fit();
        out["theta"] = std::vector<double>{er.theta};
        out["loglik"] = problem.marginal_loglik(er.theta);
        out["iterations"] = er.iterations;
        out["converged"] = er.converged;
      }
      break;
    }
    case mile::ModelKind::kLogCauchy: {
      mile::models::LogCauchy problem(data, decay);
      if (meth == mile::MethodKind::kMile) {
        const auto report = problem.fit();
        fill(report.fit);
        out["edge_individuals"] = report.edge_individuals;
      } else {
        const auto mr = problem.mom_fit();
        out["theta"] = std::vector<double>{mr.mu};
        out["z"] = mr.z;
        out["excluded_individuals"] = mr.excluded;
        out["converged"] = true;
      }
      break;
    }
    case mile::ModelKind::kGmm: {
      mile::models::Gmm problem(data, k);
      mile::SeededGenerator gen(seed);
      if (meth == mile::MethodKind::kMile) {
        const auto report = problem.fit_mile(gen);
        fill(report.fit);
      } else {
        const auto er = problem.em_fit(gen);
        out["theta"] = er.theta;
        out["z"] = er.labels;
        out["loglik"] = problem.marginal_loglik(er.theta);
        out["iterations"] = er.iterations;
        out["converged"] = er.converged;
      }
      break;
    }
    case mile::ModelKind::kBsr: {
      mile::models::SegmentedPoisson problem(data);
      mile::SeededGenerator gen(seed);
      fill(problem.fit_mile(gen));
      break;
    }
  }
  return out;
}

py::list run_experiment_py(const std::string& model, const std::vector<std::string>& methods,
                           const std::vector<double>& true_params, std::size_t n, std::size_t m,
                           std::size_t replicates, std::uint64_t seed, std::size_t workers,
                           bool emit_timings, int k, double decay, double horizon) {
  mile::ExperimentConfig cfg;
  cfg.model = mile::parse_model(model);
  for (const auto& name : methods) cfg.methods.push_back(mile::parse_method(name));
  cfg.true_params = true_params;
  cfg.n = n;
  cfg.m = m;
  cfg.replicates = replicates;
  cfg.master_seed = seed;
  cfg.workers = workers;
  cfg.emit_timings = emit_timings;
  cfg.gmm_components = k;
  cfg.lc_decay_rate = decay;
  cfg.bsr_horizon = horizon;

  py::list out;
  for (const auto& rec : mile::run_experiment(cfg)) {
    py::dict d;
    d["model"] = mile::to_string(rec.model);
    d["method"] = mile::to_string(rec.method);
    d["n"] = rec.n;
    d["m"] = rec.m;
    d["rep"] = rec.replicate;
    d["theta"] = rec.theta;
    d["loglik"] = rec.loglik;
    d["dz_mean"] = rec.dz_mean;
    d["dz_median"] = rec.dz_median;
    d["dz_sd"] = rec.dz_sd;
    d["accuracy"] = rec.accuracy;
    d["time_ms"] = rec.time_ms;
    d["converged"] = rec.converged;
    out.append(std::move(d));
  }
  return out;
}

double bootstrap_median_sd_py(const std::vector<double>& values, int resamples,
                              std::uint64_t seed) {
  mile::SeededGenerator gen(seed);
  return mile::bootstrap_median_sd(values, resamples, gen);
}

}  // namespace

PYBIND11_MODULE(_mile, mod) {
  mod.doc() = "Joint maximum-likelihood estimation over parameters and latent variables";

  mod.def("log_gamma", &mile::specfn::log_gamma, py::arg("x"));
  mod.def("digamma", &mile::specfn::digamma, py::arg("x"));
  mod.def("trigamma", &mile::specfn::trigamma, py::arg("x"));

  mod.def("simulate", &simulate_py, py::arg("model"), py::arg("true_params"), py::arg("n"),
          py::arg("m") = 1, py::arg("seed") = 0, py::arg("k") = 3, py::arg("decay") = 0.05,
          py::arg("horizon") = 1.0,
          "Draw one dataset; returns values, the true latents, and for timed "
          "models the grid");

  mod.def("fit", &fit_py, py::arg("model"), py::arg("values"), py::arg("method") = "mile",
          py::arg("seed") = 0, py::arg("k") = 3, py::arg("decay") = 0.05,
          py::arg("timestamps") = std::nullopt, py::arg("horizon") = std::nullopt,
          "Fit one dataset; returns the estimate as a dict");

  mod.def("run_experiment", &run_experiment_py, py::arg("model"), py::arg("methods"),
          py::arg("true_params"), py::arg("n"), py::arg("m"), py::arg("replicates"),
          py::arg("seed") = 0, py::arg("workers") = 0, py::arg("emit_timings") = false,
          py::arg("k") = 3, py::arg("decay") = 0.05, py::arg("horizon") = 1.0,
          "Seeded simulate+fit replicates; returns one dict per (method, replicate)");

  mod.def("bootstrap_median_sd", &bootstrap_median_sd_py, py::arg("values"),
          py::arg("resamples") = 500, py::arg("seed") = 0,
          "Bootstrap standard deviation of the median");
}
