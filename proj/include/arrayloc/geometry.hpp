#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "arrayloc/random.hpp"

namespace arrayloc {

/// Positions of the array elements. Column i of coords() is node i, rows are
/// the embedding dimensions (meters).
class NodeLayout {
 public:
  NodeLayout() = default;
  explicit NodeLayout(Eigen::MatrixXd coords);

  int dim() const { return static_cast<int>(coords_.rows()); }
  int count() const { return static_cast<int>(coords_.cols()); }
  const Eigen::MatrixXd& coords() const { return coords_; }
  Eigen::VectorXd point(int i) const { return coords_.col(i); }
  Eigen::VectorXd centroid() const { return coords_.rowwise().mean(); }

 private:
  Eigen::MatrixXd coords_;
};

/// Undirected link set: symmetric, binary, zero diagonal.
class AdjacencyMask {
 public:
  explicit AdjacencyMask(int n = 0);

  static AdjacencyMask complete(int n);
  /// Accepts any square 0/1 matrix; rejects asymmetric or non-hollow input.
  static AdjacencyMask from_matrix(const Eigen::MatrixXd& m);

  int size() const { return n_; }
  bool has(int i, int j) const { return bits_[index(i, j)] != 0; }
  void set(int i, int j, bool on = true);

  int edge_count() const;
  int degree(int i) const;
  /// Unordered pairs (i < j) without a link, row-major over the upper triangle.
  std::vector<std::pair<int, int>> missing_pairs() const;
  std::vector<std::pair<int, int>> edges() const;
  Eigen::MatrixXd weights() const;

  bool operator==(const AdjacencyMask&) const = default;

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

  int n_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Squared-distance matrix with an explicit record of which off-diagonal
/// entries were observed. Values at unobserved positions are carried along
/// untouched but must never be read as data.
class Edm {
 public:
  Edm() = default;
  explicit Edm(Eigen::MatrixXd entries);
  Edm(Eigen::MatrixXd entries, AdjacencyMask observed);

  int size() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  const AdjacencyMask& observed() const { return observed_; }
  bool is_observed(int i, int j) const { return i == j || observed_.has(i, j); }
  bool complete() const;
  int missing_count() const;
  /// Observed value; throws PreconditionError for an unobserved pair.
  double at(int i, int j) const;
  /// Largest observed entry, i.e. the squared scale of the point set.
  double max_observed() const;

 private:
  Eigen::MatrixXd entries_;
  AdjacencyMask observed_;
};

Edm edm_from_points(const NodeLayout& layout);

int max_edges(int n);
/// Robust-quadrilateral seed plus three links per extra node (2-D).
int min_edges(int n);
double min_connectivity(int n);
/// round-half-up(c * max_edges(n))
int edge_budget(int n, double c);
double connectivity_ratio(const AdjacencyMask& mask);

/// True when some fully-connected quadrilateral seeds an incremental resolution
/// in which every other node links to at least m+1 already-resolved nodes.
bool is_completable(const AdjacencyMask& mask, int m = 2);

AdjacencyMask random_completable_mask(int n, double c, Rng& rng);

Edm mask_edm(const Edm& full, const AdjacencyMask& mask);

// Layout generators used by the experiment harness.
NodeLayout random_box_layout(int n, double extent, Rng& rng);
/// Nodes at equal angular spacing on a circle with uniform radial jitter
/// (fraction of radius). Redraws until every pair is at least min_separation
/// apart; throws InvalidInput if that is geometrically impossible.
NodeLayout circle_layout(int n, double radius, double jitter, double min_separation, Rng& rng);

}  // namespace arrayloc
