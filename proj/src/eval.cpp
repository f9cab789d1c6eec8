#include "arrayloc/eval.hpp"

#include <cmath>

#include "arrayloc/error.hpp"
#include "arrayloc/units.hpp"

namespace arrayloc {

AlignmentResult align_and_evm(const NodeLayout& estimate, const NodeLayout& truth) {
  if (estimate.dim() != truth.dim() || estimate.count() != truth.count()) {
    throw InvalidInput("estimate and truth layouts differ in shape");
  }
  const Eigen::VectorXd mu_est = estimate.centroid();
  const Eigen::VectorXd mu_true = truth.centroid();
  const Eigen::MatrixXd a = estimate.coords().colwise() - mu_est;
  const Eigen::MatrixXd b = truth.coords().colwise() - mu_true;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b * a.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  AlignmentResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.translation = mu_true - out.rotation * mu_est;
  Eigen::MatrixXd aligned = (out.rotation * estimate.coords()).colwise() + out.translation;

  out.evm_per_node = (aligned - truth.coords()).colwise().norm().transpose();
  out.evm_mean = out.evm_per_node.mean();
  out.evm_rms = std::sqrt(out.evm_per_node.squaredNorm() / static_cast<double>(out.evm_per_node.size()));
  out.aligned = NodeLayout(std::move(aligned));
  return out;
}

double max_beamform_freq(double sigma_d) {
  if (!(sigma_d > 0.0)) throw InvalidInput("ranging standard deviation must be positive");
  return kSpeedOfLight / (15.0 * sigma_d);
}

}  // namespace arrayloc
