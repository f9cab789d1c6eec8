#include <cmath>
#include <limits>

#include "doctest.h"

#include "arrayloc/error.hpp"
#include "arrayloc/eval.hpp"
#include "arrayloc/solver.hpp"

using namespace arrayloc;

namespace {

struct Problem {
  NodeLayout truth;
  Edm full;
  AdjacencyMask mask;
  Edm observed;
};

Problem noiseless(int n, double c, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  Problem p;
  p.truth = random_box_layout(n, 5.0, rng);
  p.full = edm_from_points(p.truth);
  p.mask = random_completable_mask(n, c, rng);
  p.observed = mask_edm(p.full, p.mask);
  return p;
}

MissingEdgeVector true_missing(const Problem& p) {
  const auto pairs = p.mask.missing_pairs();
  MissingEdgeVector v{Eigen::VectorXd(static_cast<Eigen::Index>(pairs.size()))};
  for (std::size_t k = 0; k < pairs.size(); ++k) v.values(k) = p.full.entries()(pairs[k].first, pairs[k].second);
  return v;
}

SolverConfig quick() {
  SolverConfig cfg;
  cfg.population_size = 60;
  cfg.max_generations = 40;
  return cfg;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("cost vanishes at the true completion") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Problem p = noiseless(6 + static_cast<int>(s % 5), 0.85, s);
    const double scale = p.full.max_observed();
    REQUIRE(evaluate_cost(true_missing(p), p.observed, p.mask, 2) <= 1e-18 * scale * scale * 1e4);
  }
  const Problem full = noiseless(6, 1.0, 3);
  CHECK(evaluate_cost(MissingEdgeVector{Eigen::VectorXd(0)}, full.observed, full.mask, 2) < 1e-20);
}

TEST_CASE("search box contains the true distances") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const int n = 6 + static_cast<int>(s % 10);
    const Problem p = noiseless(n, min_connectivity(n) + (0.95 - min_connectivity(n)) * (s % 3) / 2.0, s);
    if (p.mask.missing_pairs().empty()) continue;
    const CompletionProblem cp(p.observed, p.mask, 2);
    const MissingEdgeVector t = true_missing(p);
    for (int k = 0; k < cp.variable_count(); ++k) {
      REQUIRE(cp.lower()(k) <= t.values(k) * (1.0 + 1e-9) + 1e-12);
      REQUIRE(cp.upper()(k) >= t.values(k) * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("single missing edge agrees with a grid scan") {
  // quadrilateral with the diagonal 0-2 unobserved; node 4 makes the mask completable
  Eigen::MatrixXd x(2, 5);
  x << 0.0, 2.0, 2.3, -0.2, 1.1, 0.0, 0.1, 1.9, 1.7, -1.4;
  const NodeLayout truth(x);
  const Edm full = edm_from_points(truth);
  const double target = full.entries()(0, 2);

  auto scan = [&](const AdjacencyMask& m, double& step, double& best_cost) {
    const Edm d = mask_edm(full, m);
    const CompletionProblem cp(d, m, 2);
    REQUIRE(cp.variable_count() == 1);
    const int cells = 4000;
    const double lo = cp.lower()(0), hi = cp.upper()(0);
    step = (hi - lo) / cells;
    double best_p = lo;
    best_cost = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= cells; ++k) {
      const double p = lo + k * step;
      const double f = evaluate_cost(MissingEdgeVector{Eigen::VectorXd::Constant(1, p)}, d, m, 2);
      if (f < best_cost) {
        best_cost = f;
        best_p = p;
      }
    }
    return best_p;
  };

  AdjacencyMask quad(4);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) quad.set(i, j);
  quad.set(0, 2, false);
  const Edm four = mask_edm(edm_from_points(NodeLayout(x.leftCols(4))), quad);
  {
    const CompletionProblem cp(four, quad, 2);
    const int cells = 4000;
    const double step = (cp.upper()(0) - cp.lower()(0)) / cells;
    double best_p = 0.0, best_cost = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= cells; ++k) {
      const double p = cp.lower()(0) + k * step;
      const double f = cp.cost(Eigen::VectorXd::Constant(1, p));
      if (f < best_cost) {
        best_cost = f;
        best_p = p;
      }
    }
    CHECK(std::abs(best_p - target) <= step);
  }

  AdjacencyMask five = AdjacencyMask::complete(5);
  five.set(0, 2, false);
  double step = 0.0, best_cost = 0.0;
  CHECK(std::abs(scan(five, step, best_cost) - target) <= step);
  Rng rng = make_rng(5, 0);
  const SolverRun run = complete_and_localize(mask_edm(full, five), five, 2, quick(), rng);
  CHECK(std::abs(run.best_vector.values(0) - target) <= step);
  CHECK(run.final_cost() <= best_cost + 1e-12);
}

TEST_CASE("complete mask needs no search") {
  const Problem p = noiseless(6, 1.0, 8);
  Rng rng = make_rng(8, 4);
  const SolverRun run = complete_and_localize(p.observed, p.mask, 2, SolverConfig{}, rng);
  CHECK(run.converged);
  CHECK(run.generations_used == 1);  // generation 0 only
  CHECK(run.best_cost_history.size() == 1);
  CHECK(run.best_vector.values.size() == 0);
  CHECK(align_and_evm(run.recovered_layout, p.truth).evm_mean < 1e-9);
}

TEST_CASE("noiseless minimal connectivity is recovered") {
  const Problem p = noiseless(6, 0.8, 1);
  Rng rng = make_rng(1, 4);
  SolverConfig cfg;
  cfg.max_generations = 50;
  const SolverRun run = complete_and_localize(p.observed, p.mask, 2, cfg, rng);
  CHECK(run.final_cost() < 1e-10);
  CHECK(align_and_evm(run.recovered_layout, p.truth).evm_mean < 1e-5);
  CHECK(run.completed.complete());
}

TEST_CASE("best cost never increases") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Problem p = noiseless(8, 0.75, 100 + s);
    Rng rng = make_rng(s, 4);
    const SolverRun run = complete_and_localize(p.observed, p.mask, 2, quick(), rng);
    REQUIRE(run.best_cost_history.size() == run.best_vector_history.size());
    REQUIRE(static_cast<int>(run.best_cost_history.size()) == run.generations_used);
    for (std::size_t g = 1; g < run.best_cost_history.size(); ++g) {
      REQUIRE(run.best_cost_history[g] <= run.best_cost_history[g - 1]);
    }
  }
}

TEST_CASE("same seed, same run") {
  const Problem p = noiseless(7, 0.8, 42);
  for (int workers : {1, 3}) {
    SolverConfig cfg = quick();
    cfg.workers = workers;
    Rng a = make_rng(9, 4), b = make_rng(9, 4);
    const SolverRun ra = complete_and_localize(p.observed, p.mask, 2, cfg, a);
    const SolverRun rb = complete_and_localize(p.observed, p.mask, 2, quick(), b);
    CHECK(ra.best_cost_history == rb.best_cost_history);
    CHECK(ra.best_vector.values == rb.best_vector.values);
    CHECK(ra.recovered_layout.coords() == rb.recovered_layout.coords());
  }
}

TEST_CASE("structural and configuration errors") {
  const Problem p = noiseless(6, 1.0, 2);
  AdjacencyMask weak = AdjacencyMask::complete(6);
  weak.set(5, 0, false);
  weak.set(5, 1, false);
  weak.set(5, 2, false);
  Rng rng = make_rng(1, 1);
  CHECK_THROWS_AS(complete_and_localize(mask_edm(p.full, weak), weak, 2, quick(), rng), StructuralError);

  SolverConfig bad = quick();
  bad.population_size = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = quick();
  bad.crossover_rate = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = quick();
  bad.mutation_factor = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("alternative operators still reach the optimum on an easy problem") {
  const Problem p = noiseless(6, 0.87, 12);
  for (DeStrategy st : {DeStrategy::Rand1Bin, DeStrategy::CurrentToPBest1Bin}) {
    for (GenomeEncoding enc : {GenomeEncoding::Distance, GenomeEncoding::SquaredDistance}) {
      SolverConfig cfg;
      cfg.strategy = st;
      cfg.encoding = enc;
      cfg.max_generations = 200;
      Rng rng = make_rng(12, 4);
      const SolverRun run = complete_and_localize(p.observed, p.mask, 2, cfg, rng);
      CHECK(run.final_cost() < 1e-6 * run.best_cost_history.front() + 1e-12);
    }
  }
}

}
