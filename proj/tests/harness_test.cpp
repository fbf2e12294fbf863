#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mile/harness.hpp"
#include "mile/rng.hpp"

using namespace mile;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ExperimentConfig small_bb_config() {
  ExperimentConfig cfg;
  cfg.model = ModelKind::kBetaBernoulli;
  cfg.methods = {MethodKind::kMile, MethodKind::kEm};
  cfg.true_params = {4.0};
  // m is large enough that the joint estimate stays interior; with very few
  // observations per individual the concentration estimate can run off to
  // the bracket ceiling on unlucky draws.
  cfg.n = 15;
  cfg.m = 40;
  cfg.replicates = 3;
  cfg.master_seed = 99;
  cfg.workers = 1;
  return cfg;
}

class TempFile {
 public:
  explicit TempFile(const std::string& name)
      : path_((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

std::string thrown_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

// Minimal reimplementation of the generator (Weyl counter + SplitMix64
// finalizer) so the bootstrap can be checked against independent code.
struct MiniGen {
  std::uint64_t s;
  std::uint64_t next() {
    s += 0x9E3779B97F4A7C15ULL;
    std::uint64_t x = s;
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
  }
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return r % n;
  }
};

}  // namespace

TEST_CASE("experiment output is shaped and sorted by (method, replicate)") {
  const auto cfg = small_bb_config();
  const auto records = run_experiment(cfg);
  REQUIRE(records.size() == cfg.methods.size() * cfg.replicates);

  for (std::size_t i = 0; i + 1 < records.size(); ++i) {
    const bool same_method = records[i].method == records[i + 1].method;
    if (same_method) {
      CHECK(records[i].replicate < records[i + 1].replicate);
    }
  }
  // mile block first, then em.
  for (std::size_t i = 0; i < cfg.replicates; ++i) {
    CHECK(records[i].method == MethodKind::kMile);
    CHECK(records[cfg.replicates + i].method == MethodKind::kEm);
  }
  for (const auto& rec : records) {
    CHECK(rec.model == ModelKind::kBetaBernoulli);
    CHECK(rec.n == cfg.n);
    CHECK(rec.m == cfg.m);
    REQUIRE(rec.theta.size() == 1);
    CHECK(std::isfinite(rec.theta[0]));
    CHECK(std::isfinite(rec.loglik));
    CHECK(std::isfinite(rec.dz_mean));
    CHECK(std::isnan(rec.dz_median));  // reported for log-cauchy only
    CHECK(std::isnan(rec.accuracy));
    CHECK(std::isnan(rec.time_ms));  // timings off by default
    CHECK(rec.converged);
  }
}

TEST_CASE("experiments are deterministic functions of the config") {
  const auto cfg = small_bb_config();
  const auto first = run_experiment(cfg);
  const auto second = run_experiment(cfg);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i] == second[i]);

  // Replicate scheduling must not leak into the results.
  ExperimentConfig threaded = cfg;
  threaded.workers = 3;
  const auto third = run_experiment(threaded);
  REQUIRE(third.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i] == third[i]);
}

TEST_CASE("per-method substreams do not depend on which other methods run") {
  ExperimentConfig em_only = small_bb_config();
  em_only.methods = {MethodKind::kEm};
  const auto em_records = run_experiment(em_only);

  const auto both = run_experiment(small_bb_config());
  for (const auto& rec : em_records) {
    const auto match = std::find_if(both.begin(), both.end(), [&](const ReplicateRecord& cand) {
      return cand.method == MethodKind::kEm && cand.replicate == rec.replicate;
    });
    REQUIRE(match != both.end());
    CHECK(*match == rec);
  }
}

TEST_CASE("timings are emitted only on request") {
  ExperimentConfig cfg = small_bb_config();
  cfg.replicates = 1;
  cfg.emit_timings = true;
  const auto records = run_experiment(cfg);
  for (const auto& rec : records) {
    CHECK(std::isfinite(rec.time_ms));
    CHECK(rec.time_ms >= 0.0);
  }
}

TEST_CASE("log-cauchy records carry the median latent deviation") {
  ExperimentConfig cfg;
  cfg.model = ModelKind::kLogCauchy;
  cfg.methods = {MethodKind::kMile, MethodKind::kMom};
  cfg.true_params = {2.0};
  cfg.n = 12;
  cfg.m = 25;
  cfg.replicates = 2;
  cfg.master_seed = 5;
  cfg.workers = 1;
  const auto records = run_experiment(cfg);
  REQUIRE(records.size() == 4);
  for (const auto& rec : records) {
    CHECK(std::isfinite(rec.theta[0]));
    CHECK(std::isfinite(rec.dz_median));
    CHECK(std::isnan(rec.accuracy));
    if (rec.method == MethodKind::kMom) {
      CHECK(std::isnan(rec.loglik));  // moment fits carry no likelihood value
    } else {
      CHECK(std::isfinite(rec.loglik));
    }
  }
}

TEST_CASE("a replicate whose model construction fails yields blank records") {
  // Two observations cannot support two components: the model constructor
  // throws, the batch keeps going, and the records report the failure.
  ExperimentConfig cfg;
  cfg.model = ModelKind::kGmm;
  cfg.methods = {MethodKind::kMile, MethodKind::kEm};
  cfg.true_params = {-2.0, 2.0, 1.0, 1.0, 0.5, 0.5};
  cfg.gmm_components = 2;
  cfg.n = 2;
  cfg.m = 1;
  cfg.replicates = 2;
  cfg.master_seed = 7;
  cfg.workers = 1;
  const auto records = run_experiment(cfg);
  REQUIRE(records.size() == 4);
  for (const auto& rec : records) {
    CHECK_FALSE(rec.converged);
    REQUIRE(rec.theta.size() == 6);
    for (double v : rec.theta) CHECK(std::isnan(v));
    CHECK(std::isnan(rec.loglik));
    CHECK(std::isnan(rec.accuracy));
  }
}

TEST_CASE("config validation rejects malformed experiments") {
  auto cfg = small_bb_config();

  SUBCASE("no methods") {
    cfg.methods.clear();
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  }
  SUBCASE("method unavailable for the model") {
    cfg.model = ModelKind::kLogCauchy;
    cfg.methods = {MethodKind::kMile, MethodKind::kEm};
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  }
  SUBCASE("duplicate method") {
    cfg.methods = {MethodKind::kMile, MethodKind::kMile};
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  }
  SUBCASE("zero replicates") {
    cfg.replicates = 0;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  }
  SUBCASE("wrong parameter count") {
    cfg.true_params = {4.0, 1.0};
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  }
  SUBCASE("non-finite parameter") {
    cfg.true_params = {kNaN};
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  }
  SUBCASE("gmm insists on one observation per individual") {
    cfg.model = ModelKind::kGmm;
    cfg.methods = {MethodKind::kMile};
    cfg.true_params = {-2.0, 2.0, 1.0, 1.0, 0.5, 0.5};
    cfg.gmm_components = 2;
    cfg.m = 3;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  }
  SUBCASE("positive decay and horizon") {
    cfg.model = ModelKind::kLogCauchy;
    cfg.methods = {MethodKind::kMile};
    cfg.true_params = {2.0};
    cfg.lc_decay_rate = 0.0;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);

    cfg.lc_decay_rate = 0.05;
    cfg.model = ModelKind::kBsr;
    cfg.true_params = {5.0, 5.0, 1.0, -1.0, 1.0};
    cfg.bsr_horizon = -1.0;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  }
}

TEST_CASE("model and method names round-trip through their parsers") {
  for (ModelKind model : {ModelKind::kBetaBernoulli, ModelKind::kLogCauchy, ModelKind::kGmm,
                          ModelKind::kBsr}) {
    CHECK(parse_model(to_string(model)) == model);
  }
  for (MethodKind method : {MethodKind::kMile, MethodKind::kEm, MethodKind::kMom}) {
    CHECK(parse_method(to_string(method)) == method);
  }
  CHECK(parse_model("bb") == ModelKind::kBetaBernoulli);
  CHECK(parse_model("lc") == ModelKind::kLogCauchy);
  CHECK_THROWS_AS(parse_model("poisson"), std::invalid_argument);
  CHECK_THROWS_AS(parse_method("map"), std::invalid_argument);

  CHECK(method_available(ModelKind::kBetaBernoulli, MethodKind::kEm));
  CHECK(method_available(ModelKind::kLogCauchy, MethodKind::kMom));
  CHECK(method_available(ModelKind::kBsr, MethodKind::kMile));
  CHECK_FALSE(method_available(ModelKind::kLogCauchy, MethodKind::kEm));
  CHECK_FALSE(method_available(ModelKind::kBsr, MethodKind::kEm));
  CHECK_FALSE(method_available(ModelKind::kBetaBernoulli, MethodKind::kMom));
}

TEST_CASE("summary statistics on hand-built records") {
  auto rec = [](double t, double dzm, double dzmed, bool conv) {
    ReplicateRecord r;
    r.model = ModelKind::kLogCauchy;
    r.method = MethodKind::kMile;
    r.n = 10;
    r.m = 5;
    r.theta = {t};
    r.loglik = -1.0;
    r.dz_mean = dzm;
    r.dz_median = dzmed;
    r.dz_sd = 0.1;
    r.accuracy = kNaN;
    r.time_ms = kNaN;
    r.converged = conv;
    return r;
  };
  std::vector<ReplicateRecord> records;
  records.push_back(rec(1.0, 0.1, 0.2, true));
  records.at(0).replicate = 0;
  records.push_back(rec(2.0, 0.2, 0.4, true));
  records.at(1).replicate = 1;
  records.push_back(rec(3.0, kNaN, 0.6, false));  // NaN metrics are skipped per field
  records.at(2).replicate = 2;

  const auto rows = summarize(records);
  REQUIRE(rows.size() == 1);
  const auto& row = rows.front();
  CHECK(row.replicates == 3);
  CHECK(row.converged_count == 2);
  REQUIRE(row.est.size() == 1);
  CHECK(row.est[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(row.sd[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(row.dz_mean == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(row.dz_mean_sd == doctest::Approx(std::sqrt(0.005)).epsilon(1e-12));
  // Median of the per-replicate medians, with a seeded-bootstrap spread.
  CHECK(row.dz_median == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(std::isfinite(row.dz_median_boot_sd));
  CHECK(row.dz_median_boot_sd > 0.0);
  CHECK(std::isnan(row.accuracy_mean));
  CHECK(std::isnan(row.time_mean_ms));

  SUBCASE("summary groups split by method") {
    auto em = rec(5.0, 0.3, 0.3, true);
    em.method = MethodKind::kEm;
    records.push_back(em);
    const auto split = summarize(records);
    REQUIRE(split.size() == 2);
    CHECK(split[0].method == MethodKind::kMile);
    CHECK(split[1].method == MethodKind::kEm);
    CHECK(split[1].replicates == 1);
    CHECK(std::isnan(split[1].sd[0]));  // one value has no spread
  }
  SUBCASE("mixed parameter dimensions are rejected") {
    records.at(1).theta = {1.0, 2.0};
    CHECK_THROWS_AS(summarize(records), std::invalid_argument);
  }
}

TEST_CASE("summarize refuses an empty record set") {
  CHECK_THROWS_AS(summarize({}), std::invalid_argument);
}

TEST_CASE("sample statistics") {
  CHECK(sample_mean(std::vector<double>{1.0, 2.0, 3.0}) == doctest::Approx(2.0));
  CHECK(std::isnan(sample_mean(std::vector<double>{})));
  CHECK(sample_sd(std::vector<double>{1.0, 2.0, 3.0}) == doctest::Approx(1.0));
  CHECK(sample_sd(std::vector<double>{4.0, 4.0, 4.0}) == 0.0);
  CHECK(std::isnan(sample_sd(std::vector<double>{1.0})));
  CHECK(sample_median({5.0, 1.0, 3.0}) == 3.0);
  CHECK(sample_median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(std::isnan(sample_median({})));
}

TEST_CASE("bootstrap median spread matches an independent reimplementation") {
  const std::vector<double> values{1.0, 2.0, 3.5, 7.0, 2.2, 0.4, 5.5};
  const int resamples = 100;
  SeededGenerator gen(12345);
  const double lib = bootstrap_median_sd(values, resamples, gen);

  MiniGen mini{12345};
  std::vector<double> medians;
  medians.reserve(resamples);
  std::vector<double> draw(values.size());
  for (int b = 0; b < resamples; ++b) {
    for (auto& d : draw) d = values[mini.below(values.size())];
    medians.push_back(sample_median(draw));
  }
  const double mean = sample_mean(medians);
  double ss = 0.0;
  for (double v : medians) ss += (v - mean) * (v - mean);
  const double oracle = std::sqrt(ss / static_cast<double>(medians.size() - 1));

  CHECK(lib == doctest::Approx(oracle).epsilon(1e-15));

  SeededGenerator bad(1);
  CHECK_THROWS_AS(bootstrap_median_sd(std::vector<double>{1.0}, 10, bad), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_median_sd(values, 1, bad), std::invalid_argument);
}

TEST_CASE("record CSV round-trips exactly, including missing values") {
  ExperimentConfig cfg;
  cfg.model = ModelKind::kLogCauchy;
  cfg.methods = {MethodKind::kMile, MethodKind::kMom};
  cfg.true_params = {2.0};
  cfg.n = 8;
  cfg.m = 15;
  cfg.replicates = 2;
  cfg.master_seed = 11;
  cfg.workers = 1;
  const auto records = run_experiment(cfg);

  TempFile tmp("mile_harness_roundtrip.csv");
  write_records_csv(records, tmp.path());

  const std::string text = read_text(tmp.path());
  CHECK(text.rfind("model,method,N,M,rep,theta_1,loglik,dz_mean,dz_median,dz_sd,"
                   "accuracy,time_ms,converged\n",
                   0) == 0);
  CHECK(text.find("nan") == std::string::npos);  // NaN must serialize as empty

  const auto back = read_records_csv(tmp.path());
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) CHECK(back[i] == records[i]);
}

TEST_CASE("record CSV writer rejects mixed parameter dimensions") {
  ReplicateRecord a;
  a.theta = {1.0};
  ReplicateRecord b;
  b.theta = {1.0, 2.0};
  TempFile tmp("mile_harness_mixed.csv");
  CHECK_THROWS_AS(write_records_csv({a, b}, tmp.path()), std::invalid_argument);
}

TEST_CASE("record CSV reader reports the offending line") {
  TempFile tmp("mile_harness_bad.csv");
  const std::string header =
      "model,method,N,M,rep,theta_1,loglik,dz_mean,dz_median,dz_sd,accuracy,time_ms,converged\n";

  SUBCASE("unexpected header") {
    write_text(tmp.path(), "model,method\n");
    const auto msg = thrown_message([&] { read_records_csv(tmp.path()); });
    CHECK(msg.find("line 1") != std::string::npos);
  }
  SUBCASE("wrong column count") {
    write_text(tmp.path(), header + "bb,mile,5,2,0,1.5,-3,0,,,,,1\n" + "bb,mile,5,2,1,1.5\n");
    const auto msg = thrown_message([&] { read_records_csv(tmp.path()); });
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("columns") != std::string::npos);
  }
  SUBCASE("unparseable number") {
    write_text(tmp.path(), header + "bb,mile,5,2,0,abc,-3,0,,,,,1\n");
    const auto msg = thrown_message([&] { read_records_csv(tmp.path()); });
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("bad real") != std::string::npos);
  }
  SUBCASE("bad count") {
    write_text(tmp.path(), header + "bb,mile,-5,2,0,1.5,-3,0,,,,,1\n");
    const auto msg = thrown_message([&] { read_records_csv(tmp.path()); });
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("bad count") != std::string::npos);
  }
  SUBCASE("unknown model name") {
    write_text(tmp.path(), header + "weibull,mile,5,2,0,1.5,-3,0,,,,,1\n");
    const auto msg = thrown_message([&] { read_records_csv(tmp.path()); });
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("unknown model") != std::string::npos);
  }
  SUBCASE("bad converged flag") {
    write_text(tmp.path(), header + "bb,mile,5,2,0,1.5,-3,0,,,,,yes\n");
    const auto msg = thrown_message([&] { read_records_csv(tmp.path()); });
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("converged") != std::string::npos);
  }
  SUBCASE("empty file") {
    write_text(tmp.path(), "");
    CHECK_THROWS_AS(read_records_csv(tmp.path()), std::runtime_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_records_csv("/nonexistent/records.csv"), std::runtime_error);
  }
}

TEST_CASE("summary CSV and table render missing metrics as blanks and dashes") {
  SummaryRow row;
  row.model = ModelKind::kBetaBernoulli;
  row.method = MethodKind::kMile;
  row.n = 200;
  row.m = 1000;
  row.replicates = 2;
  row.converged_count = 2;
  row.est = {5.08};
  row.sd = {0.51};
  row.dz_mean = 0.001;
  row.dz_mean_sd = 0.0005;
  row.dz_median = kNaN;
  row.dz_median_boot_sd = kNaN;
  row.accuracy_mean = kNaN;
  row.time_mean_ms = kNaN;

  TempFile tmp("mile_harness_summary.csv");
  write_summary_csv({row}, tmp.path());
  const std::string text = read_text(tmp.path());
  CHECK(text.rfind("model,method,N,M,replicates,converged,est_1,sd_1,dz_mean,dz_mean_sd,"
                   "dz_median,dz_median_sd,accuracy,time_ms\n",
                   0) == 0);
  CHECK(text.find("beta-bernoulli,mile,200,1000,2,2,") != std::string::npos);
  CHECK(text.find("nan") == std::string::npos);

  const std::string table = format_summary_table({row});
  CHECK(table.find("model") != std::string::npos);
  CHECK(table.find("beta-bernoulli") != std::string::npos);
  CHECK(table.find("5.08") != std::string::npos);
  CHECK(table.find('-') != std::string::npos);  // NaN cells render as "-"
}
