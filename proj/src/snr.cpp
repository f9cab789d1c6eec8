#include "arrayloc/snr.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "arrayloc/error.hpp"

namespace arrayloc {

LinkSnrModel::LinkSnrModel(double snr_h_linear, double mean_sq_distance_m2)
    : snr_h(snr_h_linear), mean_sq_distance(mean_sq_distance_m2) {
  if (!(snr_h > 0.0) || !(mean_sq_distance > 0.0)) {
    throw InvalidInput("link SNR model needs positive snr_h and mean squared distance");
  }
}

double link_snr(const LinkSnrModel& model, double distance_m) {
  if (!(distance_m > 0.0)) throw InvalidInput("link distance must be positive");
  return model.snr_h * model.mean_sq_distance / (distance_m * distance_m);
}

double harmonic_mean_snr(std::span<const double> link_snrs) {
  if (link_snrs.empty()) throw InvalidInput("harmonic mean of an empty SNR set");
  double inv_sum = 0.0;
  for (double s : link_snrs) {
    if (!(s > 0.0)) throw InvalidInput("link SNRs must be positive");
    inv_sum += 1.0 / s;
  }
  return static_cast<double>(link_snrs.size()) / inv_sum;
}

SampleMatrix::SampleMatrix(Eigen::MatrixXcd w) : windows(std::move(w)) {
  if (windows.cols() < 2) throw InvalidInput("blind SNR estimation needs at least two capture windows");
  if (windows.rows() < 1) throw InvalidInput("capture windows must hold at least one sample");
}

BlindSnrEstimate blind_snr_estimate(const SampleMatrix& s) {
  const auto ns = static_cast<double>(s.samples_per_window());
  const Eigen::Index l = s.window_count();
  // R_S = S S^H / N_s is N_s x N_s with rank <= L; its nonzero eigenvalues are
  // those of the L x L matrix S^H S / N_s, which is far cheaper to decompose.
  // The noise eigenvalues sit ~L*SNR below gamma_1, so this stage runs in
  // extended precision to keep them clear of rounding.
  using MatrixXcld = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
  const MatrixXcld w = s.windows.cast<std::complex<long double>>();
  const MatrixXcld r = w.adjoint() * w / static_cast<long double>(ns);
  Eigen::SelfAdjointEigenSolver<MatrixXcld> es(r, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw InvalidInput("covariance eigendecomposition failed");
  // Ascending order: gamma_1 is last.
  const long double gamma1 = es.eigenvalues()(l - 1);
  long double noise_sum = 0.0L;
  for (Eigen::Index k = 0; k + 1 < l; ++k) noise_sum += es.eigenvalues()(k);

  BlindSnrEstimate out;
  const long double noise = noise_sum / static_cast<long double>(l - 1);
  const long double signal = (gamma1 - noise) / static_cast<long double>(l);
  out.noise_power = static_cast<double>(noise);
  out.signal_power = static_cast<double>(signal);
  out.snr = noise > 0.0L ? static_cast<double>(signal / noise) : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace arrayloc
