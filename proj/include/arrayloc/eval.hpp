#pragma once

#include <Eigen/Dense>

#include "arrayloc/geometry.hpp"

namespace arrayloc {

struct AlignmentResult {
  Eigen::MatrixXd rotation;     // orthogonal, det may be -1
  Eigen::VectorXd translation;  // meters
  NodeLayout aligned;           // rotation * estimate + translation
  double evm_mean = 0.0;        // meters
  double evm_rms = 0.0;         // meters
  Eigen::VectorXd evm_per_node;
};

/// Least-squares rigid fit (rotation, reflection, translation) of `estimate`
/// onto `truth`, followed by per-node error magnitudes.
AlignmentResult align_and_evm(const NodeLayout& estimate, const NodeLayout& truth);

/// Highest carrier frequency whose wavelength / 15 still exceeds sigma_d.
double max_beamform_freq(double sigma_d);

}  // namespace arrayloc
