#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "arrayloc/geometry.hpp"
#include "arrayloc/random.hpp"

namespace arrayloc {

/// Candidate squared distances for the unobserved pairs, in the order of
/// AdjacencyMask::missing_pairs().
struct MissingEdgeVector {
  Eigen::VectorXd values;
};

enum class DeStrategy { Best1Bin, Rand1Bin, CurrentToPBest1Bin };

/// Search-space coordinates of an individual. Distance genomes are squared
/// before evaluation, which spreads short missing links over a wider share of
/// the search box.
enum class GenomeEncoding { Distance, SquaredDistance };

struct SolverConfig {
  int population_size = 200;
  int max_generations = 100;
  double convergence_delta = 1e-6;  // relative to the current best cost
  int convergence_window = 5;
  double parent_fraction = 0.5;
  double mutation_factor = 0.5;
  double crossover_rate = 0.9;
  DeStrategy strategy = DeStrategy::Best1Bin;
  double pbest_fraction = 0.1;  // current-to-pbest: share of parents eligible as pbest
  GenomeEncoding encoding = GenomeEncoding::Distance;
  // Stop once the best cost drops to (tol * largest observed entry)^2.
  double exact_fit_tolerance = 1e-9;
  int workers = 1;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

struct SolverRun {
  std::vector<double> best_cost_history;
  std::vector<Eigen::VectorXd> best_vector_history;  // best individual after each generation
  MissingEdgeVector best_vector;
  int generations_used = 0;
  bool converged = false;
  Edm completed;
  NodeLayout recovered_layout;

  double final_cost() const { return best_cost_history.back(); }
};

/// Masked completion problem: the observed EDM, the unobserved pairs and the
/// per-variable search box [0, geodesic^2].
class CompletionProblem {
 public:
  CompletionProblem(const Edm& d_obs, const AdjacencyMask& mask, int m);

  int variable_count() const { return static_cast<int>(pairs_.size()); }
  int dim() const { return m_; }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  const AdjacencyMask& mask() const { return mask_; }
  double scale() const { return scale_; }

  Eigen::MatrixXd complete(const Eigen::VectorXd& p) const;
  /// 1/2 || W o (D - edm(X)) ||_F^2 with X the MDS embedding of the completion.
  double cost(const Eigen::VectorXd& p) const;

 private:
  Eigen::MatrixXd d_;
  Eigen::MatrixXd w_;
  AdjacencyMask mask_;
  std::vector<std::pair<int, int>> pairs_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  double scale_ = 0.0;
  int m_ = 2;
};

double evaluate_cost(const MissingEdgeVector& p, const Edm& d_obs, const AdjacencyMask& mask, int m);

/// Differential-evolution EDM completion followed by classical MDS.
/// Throws StructuralError if the mask cannot be completed.
SolverRun complete_and_localize(const Edm& d_obs, const AdjacencyMask& mask, int m, const SolverConfig& cfg,
                                Rng& rng);

}  // namespace arrayloc
