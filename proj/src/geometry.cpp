#include "arrayloc/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "arrayloc/error.hpp"

namespace arrayloc {

NodeLayout::NodeLayout(Eigen::MatrixXd coords) : coords_(std::move(coords)) {
  if (coords_.rows() < 1 || coords_.cols() < 1) {
    throw InvalidInput("layout needs at least one dimension and one node");
  }
  if (!coords_.allFinite()) {
    throw InvalidInput("layout coordinates must be finite");
  }
}

AdjacencyMask::AdjacencyMask(int n) : n_(n) {
  if (n < 0) throw InvalidInput("mask size must be non-negative");
  bits_.assign(static_cast<std::size_t>(n) * n, 0);
}

AdjacencyMask AdjacencyMask::complete(int n) {
  AdjacencyMask mask(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) mask.set(i, j);
  return mask;
}

AdjacencyMask AdjacencyMask::from_matrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidInput("adjacency matrix must be square");
  const int n = static_cast<int>(m.rows());
  AdjacencyMask mask(n);
  for (int i = 0; i < n; ++i) {
    if (m(i, i) != 0.0) throw InvalidInput("adjacency matrix must have a zero diagonal");
    for (int j = 0; j < n; ++j) {
      const double v = m(i, j);
      if (v != 0.0 && v != 1.0) throw InvalidInput("adjacency matrix must be binary");
      if (v != m(j, i)) throw InvalidInput("adjacency matrix must be symmetric");
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (m(i, j) == 1.0) mask.set(i, j);
  return mask;
}

void AdjacencyMask::set(int i, int j, bool on) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw InvalidInput("mask index out of range");
  if (i == j) throw InvalidInput("mask diagonal must stay zero");
  bits_[index(i, j)] = on ? 1 : 0;
  bits_[index(j, i)] = on ? 1 : 0;
}

int AdjacencyMask::edge_count() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}) / 2);
}

int AdjacencyMask::degree(int i) const {
  int d = 0;
  for (int j = 0; j < n_; ++j) d += bits_[index(i, j)];
  return d;
}

std::vector<std::pair<int, int>> AdjacencyMask::missing_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (!has(i, j)) out.emplace_back(i, j);
  return out;
}

std::vector<std::pair<int, int>> AdjacencyMask::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (has(i, j)) out.emplace_back(i, j);
  return out;
}

Eigen::MatrixXd AdjacencyMask::weights() const {
  Eigen::MatrixXd w(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) w(i, j) = bits_[index(i, j)];
  return w;
}

namespace {

void validate_edm(Eigen::MatrixXd& d, const AdjacencyMask& observed) {
  if (d.rows() != d.cols()) throw InvalidInput("EDM must be square");
  const int n = static_cast<int>(d.rows());
  if (observed.size() != n) throw InvalidInput("EDM and mask dimensions differ");
  for (int i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) throw InvalidInput("EDM must be hollow");
    for (int j = i + 1; j < n; ++j) {
      if (!observed.has(i, j)) continue;
      const double a = d(i, j);
      const double b = d(j, i);
      if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidInput("observed EDM entries must be finite");
      if (a < 0.0 || b < 0.0) throw InvalidInput("observed EDM entries must be non-negative");
      if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) {
        throw InvalidInput("EDM must be symmetric (entry " + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      const double mean = 0.5 * (a + b);
      d(i, j) = mean;
      d(j, i) = mean;
    }
  }
}

}  // namespace

Edm::Edm(Eigen::MatrixXd entries)
    : entries_(std::move(entries)), observed_(AdjacencyMask::complete(static_cast<int>(entries_.rows()))) {
  validate_edm(entries_, observed_);
}

Edm::Edm(Eigen::MatrixXd entries, AdjacencyMask observed)
    : entries_(std::move(entries)), observed_(std::move(observed)) {
  validate_edm(entries_, observed_);
}

bool Edm::complete() const { return missing_count() == 0; }

int Edm::missing_count() const {
  const int n = size();
  return n * (n - 1) / 2 - observed_.edge_count();
}

double Edm::at(int i, int j) const {
  if (!is_observed(i, j)) {
    throw PreconditionError("EDM entry (" + std::to_string(i) + "," + std::to_string(j) + ") is unobserved");
  }
  return entries_(i, j);
}

double Edm::max_observed() const {
  double best = 0.0;
  for (const auto& [i, j] : observed_.edges()) best = std::max(best, entries_(i, j));
  return best;
}

Edm edm_from_points(const NodeLayout& layout) {
  const auto& x = layout.coords();
  const int n = layout.count();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = (x.col(i) - x.col(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return Edm(std::move(d));
}

int max_edges(int n) {
  if (n < 2) throw InvalidInput("max_edges needs N >= 2");
  return n * (n - 1) / 2;
}

int min_edges(int n) {
  if (n < 4) throw InvalidInput("min_edges needs N >= 4 (robust quadrilateral seed)");
  return 3 * n - 6;
}

double min_connectivity(int n) {
  return static_cast<double>(min_edges(n)) / static_cast<double>(max_edges(n));
}

int edge_budget(int n, double c) {
  if (!(c > 0.0 && c <= 1.0)) throw InvalidInput("connectivity must lie in (0, 1]");
  return static_cast<int>(std::floor(c * max_edges(n) + 0.5));
}

double connectivity_ratio(const AdjacencyMask& mask) {
  return static_cast<double>(mask.edge_count()) / static_cast<double>(max_edges(mask.size()));
}

namespace {

bool resolves_from_seed(const AdjacencyMask& mask, const std::array<int, 4>& seed, int links_needed) {
  const int n = mask.size();
  std::vector<char> resolved(n, 0);
  for (int s : seed) resolved[s] = 1;
  int count = 4;
  bool grew = true;
  while (grew && count < n) {
    grew = false;
    for (int v = 0; v < n; ++v) {
      if (resolved[v]) continue;
      int links = 0;
      for (int u = 0; u < n; ++u) links += (resolved[u] && mask.has(u, v)) ? 1 : 0;
      if (links >= links_needed) {
        resolved[v] = 1;
        ++count;
        grew = true;
      }
    }
  }
  return count == n;
}

}  // namespace

bool is_completable(const AdjacencyMask& mask, int m) {
  if (m != 2) throw InvalidInput("completability is only defined for m = 2");
  const int n = mask.size();
  if (n < 4) throw InvalidInput("completability needs N >= 4");
  // Resolution is monotone, so a greedy closure from each seed is exhaustive.
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (!mask.has(a, b)) continue;
      for (int c = b + 1; c < n; ++c) {
        if (!mask.has(a, c) || !mask.has(b, c)) continue;
        for (int d = c + 1; d < n; ++d) {
          if (!mask.has(a, d) || !mask.has(b, d) || !mask.has(c, d)) continue;
          if (resolves_from_seed(mask, {a, b, c, d}, m + 1)) return true;
        }
      }
    }
  return false;
}

AdjacencyMask random_completable_mask(int n, double c, Rng& rng) {
  if (n < 4) throw InvalidInput("random_completable_mask needs N >= 4");
  const int budget = edge_budget(n, c);
  if (budget < min_edges(n)) {
    throw InvalidInput("connectivity " + std::to_string(c) + " is below the minimum " +
                       std::to_string(min_connectivity(n)) + " for N=" + std::to_string(n));
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  AdjacencyMask mask(n);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) mask.set(order[a], order[b]);

  std::vector<int> resolved(order.begin(), order.begin() + 4);
  for (int k = 4; k < n; ++k) {
    const int node = order[k];
    // Partial Fisher-Yates: first three entries become a uniform sample.
    for (int t = 0; t < 3; ++t) {
      std::uniform_int_distribution<std::size_t> pick(t, resolved.size() - 1);
      std::swap(resolved[t], resolved[pick(rng)]);
      mask.set(node, resolved[t]);
    }
    resolved.push_back(node);
  }

  auto free_pairs = mask.missing_pairs();
  std::shuffle(free_pairs.begin(), free_pairs.end(), rng);
  const int extra = budget - mask.edge_count();
  for (int k = 0; k < extra; ++k) mask.set(free_pairs[k].first, free_pairs[k].second);
  return mask;
}

Edm mask_edm(const Edm& full, const AdjacencyMask& mask) {
  if (full.size() != mask.size()) throw InvalidInput("EDM and mask dimensions differ");
  for (const auto& [i, j] : mask.edges()) {
    if (!full.is_observed(i, j)) {
      throw PreconditionError("mask selects an entry the EDM does not observe");
    }
  }
  return Edm(full.entries(), mask);
}

NodeLayout random_box_layout(int n, double extent, Rng& rng) {
  if (n < 1 || !(extent > 0.0)) throw InvalidInput("random_box_layout needs N >= 1 and extent > 0");
  std::uniform_real_distribution<double> u(0.0, extent);
  Eigen::MatrixXd x(2, n);
  for (int i = 0; i < n; ++i) {
    x(0, i) = u(rng);
    x(1, i) = u(rng);
  }
  return NodeLayout(std::move(x));
}

NodeLayout circle_layout(int n, double radius, double jitter, double min_separation, Rng& rng) {
  if (n < 2 || !(radius > 0.0) || jitter < 0.0 || jitter >= 1.0 || min_separation < 0.0) {
    throw InvalidInput("circle_layout parameters out of range");
  }
  const double widest_chord = 2.0 * radius * (1.0 + jitter) * std::sin(std::numbers::pi / n);
  if (n > 1 && widest_chord < min_separation) {
    throw InvalidInput("circle of radius " + std::to_string(radius) + " cannot hold " + std::to_string(n) +
                       " nodes at the requested separation");
  }
  std::uniform_real_distribution<double> u(-jitter, jitter);
  Eigen::MatrixXd x(2, n);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (int i = 0; i < n; ++i) {
      const double theta = 2.0 * std::numbers::pi * i / n;
      const double r = radius * (1.0 + u(rng));
      x(0, i) = r * std::cos(theta);
      x(1, i) = r * std::sin(theta);
    }
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      for (int j = i + 1; j < n && ok; ++j) ok = (x.col(i) - x.col(j)).norm() >= min_separation;
    if (ok) return NodeLayout(x);
  }
  throw InvalidInput("could not place circle layout nodes at the requested separation");
}

}  // namespace arrayloc
