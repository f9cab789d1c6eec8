#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"

#include "arrayloc/error.hpp"
#include "arrayloc/harness.hpp"
#include "arrayloc/io.hpp"

using namespace arrayloc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("arrayloc_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TrialRecord record(double evm, bool converged) {
  TrialRecord r;
  r.n = 6;
  r.c = 0.8;
  r.bandwidth_hz = 40e6;
  r.final_evm = evm;
  r.final_evm_rms = evm;
  r.converged = converged;
  r.generations_used = 1;
  r.cost_history = {1.0, 0.0};
  r.evm_history = {2.0 * evm, evm};
  return r;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("single noiseless complete trial") {
  ExperimentConfig cfg;
  cfg.trials = 1;
  cfg.n_list = {6};
  cfg.c_list = {1.0};
  cfg.noiseless = true;
  const auto recs = run_experiment(cfg);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].error.empty());
  CHECK(recs[0].final_evm < 1e-9);
  const auto rows = summarize(recs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].convergence_rate == 1.0);
  CHECK(rows[0].mean_evm < 1e-9);
}

TEST_CASE("summary statistics") {
  const auto rows = summarize({record(1e-3, true), record(3e-3, false)});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].trials == 2);
  CHECK(rows[0].mean_evm == doctest::Approx(2e-3));
  CHECK(rows[0].median_evm == doctest::Approx(2e-3));
  CHECK(rows[0].std_evm == doctest::Approx(std::sqrt(2.0) * 1e-3));
  CHECK(rows[0].convergence_rate == 0.5);
  CHECK(rows[0].mean_evm_converged == doctest::Approx(1e-3));
  REQUIRE(rows[0].mean_evm_curve.size() == 2);
  CHECK(rows[0].mean_evm_curve[0] == doctest::Approx(4e-3));
  CHECK(rows[0].mean_evm_curve[1] == doctest::Approx(2e-3));

  const auto perfect = summarize({record(0.0, true)});
  CHECK(perfect[0].mean_evm == 0.0);
  CHECK(perfect[0].convergence_rate == 1.0);

  const auto anchor = summarize({record(0.82e-3, true)});
  CHECK(anchor[0].beamform_freq_hz == doctest::Approx(24.4e9).epsilon(0.01));

  TrialRecord failed = record(0.0, false);
  failed.error = "boom";
  const auto with_failure = summarize({record(1e-3, true), failed});
  CHECK(with_failure[0].failures == 1);
  CHECK(with_failure[0].mean_evm == doctest::Approx(1e-3));
}

TEST_CASE("sweep covers every point and trial") {
  ExperimentConfig cfg;
  cfg.trials = 2;
  cfg.n_list = {6, 7};
  cfg.c_list = {0.9, 1.0};
  cfg.b_list = {20e6, 40e6};
  cfg.solver.population_size = 30;
  cfg.solver.max_generations = 5;
  const auto recs = run_experiment(cfg);
  REQUIRE(recs.size() == 16);
  for (std::size_t k = 0; k < recs.size(); ++k) {
    CHECK(recs[k].trial_id == static_cast<int>(k));
    CHECK(recs[k].trial_index == static_cast<int>(k % 2));
    CHECK(recs[k].error.empty());
  }
  CHECK(recs[0].n == 6);
  CHECK(recs[15].n == 7);
  CHECK(summarize(recs).size() == 8);
  // matched seeds across sweep points
  CHECK(recs[0].seed == recs[2].seed);
  CHECK(recs[0].seed != recs[1].seed);
}

TEST_CASE("trials are reproducible") {
  ExperimentConfig cfg;
  cfg.solver.population_size = 40;
  cfg.solver.max_generations = 10;
  const TrialRecord a = run_trial(cfg, 6, 0.8, 40e6, 3);
  const TrialRecord b = run_trial(cfg, 6, 0.8, 40e6, 3);
  CHECK(a.cost_history == b.cost_history);
  CHECK(a.final_evm == b.final_evm);
}

TEST_CASE("configuration checks") {
  ExperimentConfig cfg;
  cfg.c_list = {0.7};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.c_list = {0.8};
  CHECK_NOTHROW(cfg.validate());
  cfg.ranging_mode = RangingMode::SignalLevel;
  cfg.n_list = {10};
  cfg.trials = 20;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.allow_large_signal_level = true;
  CHECK_NOTHROW(cfg.validate());

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"trails": 3})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"solver": {"strategy": "best2exp"}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"trials": "many"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"N_list": [10], "c_list": [0.5]})")), ConfigError);

  const ExperimentConfig j = config_from_json(nlohmann::json::parse(R"({
    "trials": 7, "N_list": [6, 10], "c_list": [0.8, 1.0], "B_list": [10e6],
    "layout": {"type": "circle", "radius": 2.0},
    "ranging_mode": "statistical", "seed": 99,
    "solver": {"population_size": 50, "strategy": "rand1bin", "encoding": "squared_distance"}})"));
  CHECK(j.trials == 7);
  CHECK(j.n_list == std::vector<int>{6, 10});
  CHECK(j.b_list == std::vector<double>{10e6});
  CHECK(j.layout.kind == LayoutSpec::Kind::Circle);
  CHECK(j.layout.radius == 2.0);
  CHECK(j.seed == 99);
  CHECK(j.solver.population_size == 50);
  CHECK(j.solver.strategy == DeStrategy::Rand1Bin);
  CHECK(j.solver.encoding == GenomeEncoding::SquaredDistance);
}

TEST_CASE("outputs") {
  const fs::path dir = scratch("outputs");
  ExperimentConfig cfg;
  cfg.trials = 2;
  cfg.solver.population_size = 30;
  cfg.solver.max_generations = 5;
  const auto recs = run_experiment(cfg);
  write_outputs(dir, recs, summarize(recs));
  for (const char* f : {"records.csv", "convergence.csv", "summary.csv", "summary.json"}) CHECK(fs::exists(dir / f));
  const std::string rec = slurp(dir / "records.csv");
  CHECK(rec.rfind("trial_id,", 0) == 0);
  CHECK(rec.find("wall") == std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(j.contains("total_wall_time_s"));
  CHECK(j["points"].size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("csv round trips") {
  const fs::path dir = scratch("csv");
  Rng rng = make_rng(7, 7);
  const NodeLayout l = random_box_layout(6, 5.0, rng);
  write_layout_csv(dir / "layout.csv", l);
  CHECK(read_layout_csv(dir / "layout.csv").coords() == l.coords());

  const AdjacencyMask m = random_completable_mask(6, 0.8, rng);
  const Edm d = mask_edm(edm_from_points(l), m);
  write_edm_csv(dir / "edm.csv", d);
  const Edm back = read_edm_csv(dir / "edm.csv");
  CHECK(back.observed() == m);
  for (auto [i, j] : m.edges()) CHECK(back.at(i, j) == d.at(i, j));

  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK_THROWS(read_edm_csv(dir / "missing.csv"));
  fs::remove_all(dir);
}

}
