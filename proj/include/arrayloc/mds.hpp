#pragma once

#include <Eigen/Dense>

#include "arrayloc/geometry.hpp"

namespace arrayloc {

/// Centered inner-product matrix X^T X recovered from an EDM.
struct GramMatrix {
  Eigen::MatrixXd entries;
};

/// Eigenpairs ordered by descending |value|; vectors are the matching columns.
struct EigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// -1/2 (I - 1 s^T) D (I - s 1^T). The centering vector must satisfy s^T 1 = 1.
GramMatrix gram_from_edm(const Edm& d, const Eigen::VectorXd& s);
/// Geometric centering, s = 1/N.
GramMatrix gram_from_edm(const Edm& d);

EigenSystem eigen_decompose(const GramMatrix& g);

struct MdsResult {
  NodeLayout layout;
  Eigen::VectorXd eigenvalues;  // all N, by descending magnitude
  /// Set when one of the top-m eigenvalues was materially negative and got
  /// clipped to zero (the input was not close to Euclidean).
  bool clipped = false;
};

MdsResult classical_mds(const Edm& d, int m);

/// Unchecked classical MDS for inner loops: `d` must be square and fully
/// populated. Returns the m x N coordinate matrix.
Eigen::MatrixXd classical_mds_kernel(const Eigen::MatrixXd& d, int m);

/// 1 diag(G)^T - 2G + diag(G) 1^T for G = X^T X.
Eigen::MatrixXd edm_of(const Eigen::MatrixXd& x);

}  // namespace arrayloc
