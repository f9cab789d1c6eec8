#include "arrayloc/mds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "arrayloc/error.hpp"

namespace arrayloc {

namespace {

void require_complete(const Edm& d) {
  if (!d.complete()) throw PreconditionError("MDS requires a fully observed EDM");
}

// Indices of eigenvalues by descending magnitude; ties keep solver order.
std::vector<int> magnitude_order(const Eigen::VectorXd& values) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return std::abs(values(a)) > std::abs(values(b)); });
  return idx;
}

}  // namespace

GramMatrix gram_from_edm(const Edm& d, const Eigen::VectorXd& s) {
  require_complete(d);
  const int n = d.size();
  if (s.size() != n) throw InvalidInput("centering vector length must equal N");
  if (std::abs(s.sum() - 1.0) > 1e-9) throw InvalidInput("centering vector must satisfy s^T 1 = 1");
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, 1);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd left = eye - ones * s.transpose();
  const Eigen::MatrixXd right = eye - s * ones.transpose();
  Eigen::MatrixXd g = -0.5 * left * d.entries() * right;
  return {std::move(g)};
}

GramMatrix gram_from_edm(const Edm& d) {
  const int n = d.size();
  if (n < 1) throw InvalidInput("empty EDM");
  return gram_from_edm(d, Eigen::VectorXd::Constant(n, 1.0 / n));
}

EigenSystem eigen_decompose(const GramMatrix& g) {
  const Eigen::MatrixXd sym = 0.5 * (g.entries + g.entries.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw InvalidInput("eigendecomposition failed");
  const auto order = magnitude_order(es.eigenvalues());
  EigenSystem out;
  out.values.resize(sym.rows());
  out.vectors.resize(sym.rows(), sym.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.values(k) = es.eigenvalues()(order[k]);
    out.vectors.col(k) = es.eigenvectors().col(order[k]);
  }
  return out;
}

MdsResult classical_mds(const Edm& d, int m) {
  require_complete(d);
  const int n = d.size();
  if (m < 1 || m > n) throw InvalidInput("MDS dimension must satisfy 1 <= m <= N");
  const auto eig = eigen_decompose(gram_from_edm(d));

  MdsResult out;
  out.eigenvalues = eig.values;
  const double lead = std::abs(eig.values(0));
  Eigen::MatrixXd x(m, n);
  for (int k = 0; k < m; ++k) {
    const double lambda = eig.values(k);
    if (lambda < -1e-9 * lead) out.clipped = true;
    x.row(k) = std::sqrt(std::max(lambda, 0.0)) * eig.vectors.col(k).transpose();
  }
  out.layout = NodeLayout(std::move(x));
  return out;
}

Eigen::MatrixXd classical_mds_kernel(const Eigen::MatrixXd& d, int m) {
  const Eigen::Index n = d.rows();
  const Eigen::VectorXd row_mean = d.rowwise().mean();
  const Eigen::RowVectorXd col_mean = d.colwise().mean();
  const double grand = d.mean();
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) p(i, j) = -0.5 * (d(i, j) - row_mean(i) - col_mean(j) + grand);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p);
  const Eigen::VectorXd& values = es.eigenvalues();
  // Ascending order: the largest magnitudes sit at either end.
  Eigen::MatrixXd x(m, n);
  Eigen::Index lo = 0;
  Eigen::Index hi = n - 1;
  for (int k = 0; k < m; ++k) {
    Eigen::Index pick;
    if (std::abs(values(hi)) >= std::abs(values(lo))) {
      pick = hi--;
    } else {
      pick = lo++;
    }
    x.row(k) = std::sqrt(std::max(values(pick), 0.0)) * es.eigenvectors().col(pick).transpose();
  }
  return x;
}

Eigen::MatrixXd edm_of(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd g = x.transpose() * x;
  const Eigen::VectorXd diag = g.diagonal();
  Eigen::MatrixXd d = (-2.0 * g).colwise() + diag;
  d.rowwise() += diag.transpose();
  d.diagonal().setZero();
  return d;
}

}  // namespace arrayloc
