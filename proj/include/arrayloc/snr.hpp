#pragma once

#include <span>

#include <Eigen/Dense>

namespace arrayloc {

/// Array-level SNR description: the harmonic mean of all link SNRs and the
/// mean squared internode distance it was referenced to.
struct LinkSnrModel {
  double snr_h = 0.0;             // linear
  double mean_sq_distance = 0.0;  // m^2

  LinkSnrModel(double snr_h_linear, double mean_sq_distance_m2);
};

/// Inverse-square link SNR: snr_h * dbar^2 / d^2.
double link_snr(const LinkSnrModel& model, double distance_m);

double harmonic_mean_snr(std::span<const double> link_snrs);

/// N_s x L complex capture matrix, one coherently aligned window per column.
struct SampleMatrix {
  Eigen::MatrixXcd windows;

  explicit SampleMatrix(Eigen::MatrixXcd w);
  Eigen::Index samples_per_window() const { return windows.rows(); }
  Eigen::Index window_count() const { return windows.cols(); }
};

struct BlindSnrEstimate {
  double signal_power = 0.0;
  double noise_power = 0.0;
  double snr = 0.0;  // linear
};

/// Eigenvalue-based estimate: the dominant eigenvalue of the window covariance
/// carries the common signal, the remaining L-1 eigenvalues the noise floor.
BlindSnrEstimate blind_snr_estimate(const SampleMatrix& s);

}  // namespace arrayloc
