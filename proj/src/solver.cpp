#include "arrayloc/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "arrayloc/error.hpp"
#include "arrayloc/mds.hpp"

namespace arrayloc {

void SolverConfig::validate() const {
  if (population_size < 4) throw ConfigError("population_size must be at least 4");
  if (max_generations < 1) throw ConfigError("max_generations must be at least 1");
  if (!(convergence_delta >= 0.0)) throw ConfigError("convergence_delta must be non-negative");
  if (convergence_window < 1) throw ConfigError("convergence_window must be at least 1");
  auto rate = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1]");
  };
  rate(parent_fraction, "parent_fraction");
  rate(mutation_factor, "mutation_factor");
  rate(crossover_rate, "crossover_rate");
  rate(pbest_fraction, "pbest_fraction");
  if (!(exact_fit_tolerance >= 0.0)) throw ConfigError("exact_fit_tolerance must be non-negative");
  if (workers < 1) throw ConfigError("workers must be at least 1");
}

CompletionProblem::CompletionProblem(const Edm& d_obs, const AdjacencyMask& mask, int m)
    : d_(d_obs.entries()), w_(mask.weights()), mask_(mask), pairs_(mask.missing_pairs()), m_(m) {
  const int n = d_obs.size();
  if (mask.size() != n) throw InvalidInput("mask and EDM sizes differ");
  if (m < 1 || m > n) throw InvalidInput("embedding dimension must satisfy 1 <= m <= N");
  for (const auto& [i, j] : mask.edges()) {
    if (!d_obs.is_observed(i, j)) throw PreconditionError("mask selects an unobserved EDM entry");
  }
  for (const auto& [i, j] : pairs_) {
    d_(i, j) = 0.0;
    d_(j, i) = 0.0;
  }
  scale_ = 0.0;
  for (const auto& [i, j] : mask.edges()) scale_ = std::max(scale_, d_(i, j));

  // Triangle-inequality bound smoothing over the observed links: shortest paths
  // give upper bounds, and L_ij >= L_ik - U_kj gives lower bounds.
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd up = Eigen::MatrixXd::Constant(n, n, inf);
  Eigen::MatrixXd lo = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) up(i, i) = 0.0;
  for (const auto& [i, j] : mask.edges()) {
    up(i, j) = up(j, i) = std::sqrt(d_(i, j));
    lo(i, j) = lo(j, i) = up(i, j);
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) up(i, j) = std::min(up(i, j), up(i, k) + up(k, j));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j || mask.has(i, j)) continue;
        lo(i, j) = std::max({lo(i, j), lo(i, k) - up(k, j), lo(k, j) - up(i, k)});
      }

  const auto nv = static_cast<Eigen::Index>(pairs_.size());
  lower_.resize(nv);
  upper_.resize(nv);
  for (Eigen::Index k = 0; k < nv; ++k) {
    const auto [i, j] = pairs_[k];
    if (!std::isfinite(up(i, j))) throw StructuralError("mask leaves the link graph disconnected");
    // Noisy inputs can make the bounds cross; the upper bound wins.
    const double l = std::min(std::max(lo(i, j), lo(j, i)), up(i, j));
    lower_(k) = l * l;
    upper_(k) = up(i, j) * up(i, j);
  }
}

Eigen::MatrixXd CompletionProblem::complete(const Eigen::VectorXd& p) const {
  if (p.size() != variable_count()) throw InvalidInput("missing-edge vector has the wrong length");
  Eigen::MatrixXd d = d_;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto [i, j] = pairs_[k];
    d(i, j) = p(static_cast<Eigen::Index>(k));
    d(j, i) = p(static_cast<Eigen::Index>(k));
  }
  return d;
}

double CompletionProblem::cost(const Eigen::VectorXd& p) const {
  const Eigen::MatrixXd x = classical_mds_kernel(complete(p), m_);
  return 0.5 * (w_.cwiseProduct(d_ - edm_of(x))).squaredNorm();
}

double evaluate_cost(const MissingEdgeVector& p, const Edm& d_obs, const AdjacencyMask& mask, int m) {
  return CompletionProblem(d_obs, mask, m).cost(p.values);
}

namespace {

// Genomes hold distances or squared distances depending on the encoding.
Eigen::VectorXd decode(const Eigen::VectorXd& genome, GenomeEncoding enc) {
  return enc == GenomeEncoding::Distance ? Eigen::VectorXd(genome.array().square()) : genome;
}

void evaluate_all(const CompletionProblem& prob, GenomeEncoding enc, const std::vector<Eigen::VectorXd>& pop,
                  std::vector<double>& cost, std::size_t first, int workers) {
  const std::size_t count = pop.size() - first;
  const auto nthreads = static_cast<std::size_t>(std::min<std::size_t>(workers, count));
  if (nthreads <= 1) {
    for (std::size_t k = first; k < pop.size(); ++k) cost[k] = prob.cost(decode(pop[k], enc));
    return;
  }
  std::vector<std::jthread> threads;
  for (std::size_t t = 0; t < nthreads; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t k = first + t; k < pop.size(); k += nthreads) cost[k] = prob.cost(decode(pop[k], enc));
    });
  }
}

Eigen::VectorXd random_individual(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, Rng& rng) {
  Eigen::VectorXd v(lo.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = lo(k) + (hi(k) - lo(k)) * uniform01(rng);
  return v;
}

// Three distinct parent indices, none equal to `self`.
std::array<int, 3> pick_donors(int parents, int self, Rng& rng) {
  std::uniform_int_distribution<int> u(0, parents - 1);
  std::array<int, 3> r{};
  for (int k = 0; k < 3; ++k) {
    int c;
    do {
      c = u(rng);
    } while (c == self || std::find(r.begin(), r.begin() + k, c) != r.begin() + k);
    r[k] = c;
  }
  return r;
}

}  // namespace

SolverRun complete_and_localize(const Edm& d_obs, const AdjacencyMask& mask, int m, const SolverConfig& cfg,
                                Rng& rng) {
  cfg.validate();
  if (mask.size() >= 4 && m == 2 && !is_completable(mask, m)) {
    throw StructuralError("mask has no robust-quadrilateral completion order");
  }
  const CompletionProblem prob(d_obs, mask, m);
  const int nv = prob.variable_count();

  SolverRun run;
  auto finish = [&](const Eigen::VectorXd& best) {
    run.best_vector.values = best;
    run.generations_used = static_cast<int>(run.best_cost_history.size());
    run.completed = Edm(prob.complete(best));
    run.recovered_layout = classical_mds(run.completed, m).layout;
    return run;
  };

  if (nv == 0) {
    const Eigen::VectorXd empty;
    run.best_cost_history.push_back(prob.cost(empty));
    run.best_vector_history.push_back(empty);
    run.converged = true;
    return finish(empty);
  }

  const int pop_size = cfg.population_size;
  const int parents = std::clamp(static_cast<int>(std::lround(cfg.parent_fraction * pop_size)), 4, pop_size);
  const double exact_fit = std::pow(cfg.exact_fit_tolerance * prob.scale(), 2);
  const GenomeEncoding enc = cfg.encoding;
  const Eigen::VectorXd lo = enc == GenomeEncoding::Distance ? Eigen::VectorXd(prob.lower().cwiseSqrt()) : prob.lower();
  const Eigen::VectorXd hi = enc == GenomeEncoding::Distance ? Eigen::VectorXd(prob.upper().cwiseSqrt()) : prob.upper();

  std::vector<Eigen::VectorXd> pop(pop_size);
  std::vector<double> cost(pop_size);
  for (auto& ind : pop) ind = random_individual(lo, hi, rng);
  evaluate_all(prob, enc, pop, cost, 0, cfg.workers);

  std::vector<int> order(pop_size);
  std::vector<double> parent_mean;
  auto rank = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cost[a] < cost[b]; });
    std::vector<Eigen::VectorXd> p2(pop_size);
    std::vector<double> c2(pop_size);
    for (int k = 0; k < pop_size; ++k) {
      p2[k] = std::move(pop[order[k]]);
      c2[k] = cost[order[k]];
    }
    pop = std::move(p2);
    cost = std::move(c2);
    run.best_cost_history.push_back(cost[0]);
    run.best_vector_history.push_back(decode(pop[0], enc));
    parent_mean.push_back(std::accumulate(cost.begin(), cost.begin() + parents, 0.0) / parents);
  };
  rank();

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> pick_var(0, nv - 1);
  const int window = cfg.convergence_window;

  for (int gen = 1; gen < cfg.max_generations; ++gen) {
    const double best = run.best_cost_history.back();
    if (best <= exact_fit) {
      run.converged = true;
      break;
    }
    const auto h = parent_mean.size();
    if (h > static_cast<std::size_t>(window)) {
      const double drop = (parent_mean[h - 1 - window] - parent_mean[h - 1]) / window;
      if (drop <= cfg.convergence_delta * parent_mean[h - 1]) {
        run.converged = true;
        break;
      }
    }

    // Trials for the retained parents, then random immigrants for the rest.
    std::vector<Eigen::VectorXd> trials(pop_size);
    for (int k = 0; k < parents; ++k) {
      const auto r = pick_donors(parents, k, rng);
      Eigen::VectorXd donor;
      switch (cfg.strategy) {
        case DeStrategy::Best1Bin:
          donor = pop[0] + cfg.mutation_factor * (pop[r[0]] - pop[r[1]]);
          break;
        case DeStrategy::Rand1Bin:
          donor = pop[r[2]] + cfg.mutation_factor * (pop[r[0]] - pop[r[1]]);
          break;
        case DeStrategy::CurrentToPBest1Bin: {
          const int top = std::max(1, static_cast<int>(std::lround(cfg.pbest_fraction * parents)));
          const int pb = std::uniform_int_distribution<int>(0, top - 1)(rng);
          donor = pop[k] + cfg.mutation_factor * (pop[pb] - pop[k]) + cfg.mutation_factor * (pop[r[0]] - pop[r[1]]);
          break;
        }
      }
      Eigen::VectorXd trial = pop[k];
      const int forced = pick_var(rng);
      for (int v = 0; v < nv; ++v) {
        if (v != forced && u01(rng) >= cfg.crossover_rate) continue;
        double x = donor(v);
        if (x < lo(v)) x = 0.5 * (pop[k](v) + lo(v));
        if (x > hi(v)) x = 0.5 * (pop[k](v) + hi(v));
        trial(v) = x;
      }
      trials[k] = std::move(trial);
    }
    for (int k = parents; k < pop_size; ++k) trials[k] = random_individual(lo, hi, rng);

    std::vector<double> trial_cost(pop_size);
    evaluate_all(prob, enc, trials, trial_cost, 0, cfg.workers);
    for (int k = 0; k < parents; ++k) {
      if (trial_cost[k] <= cost[k]) {
        pop[k] = std::move(trials[k]);
        cost[k] = trial_cost[k];
      }
    }
    for (int k = parents; k < pop_size; ++k) {
      pop[k] = std::move(trials[k]);
      cost[k] = trial_cost[k];
    }
    rank();
  }
  if (!run.converged && run.best_cost_history.back() <= exact_fit) run.converged = true;
  return finish(decode(pop[0], enc));
}

}  // namespace arrayloc
