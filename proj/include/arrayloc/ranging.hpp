#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "arrayloc/geometry.hpp"
#include "arrayloc/random.hpp"

namespace arrayloc {

using Complex = std::complex<double>;
using Signal = std::vector<Complex>;

/// Pulsed two-tone timing waveform parameters. Defaults are the laboratory
/// configuration: 40 MHz tone separation, 10 us pulse, 200 MSa/s, 50 ns ramps.
struct WaveformParams {
  double bandwidth_hz = 40e6;
  double pulse_s = 10e-6;
  double sample_rate = 200e6;
  double rise_fall_s = 50e-9;
};

struct TwoToneWaveform {
  WaveformParams params;
  Signal samples;
  bool degenerate = false;  // zero tone separation collapses to a single tone
};

/// 2 cos(pi B t) at complex baseband with raised-cosine ramps, unit RMS over the
/// flat part of the pulse.
TwoToneWaveform synth_two_tone(double bandwidth_hz, double pulse_s, double sample_rate, double rise_fall_s);
TwoToneWaveform synth_two_tone(const WaveformParams& p);

/// Range standard deviation bound for a two-tone pulse:
/// c0 / sqrt(2 (pi B)^2 tau_p SNR f_s). An infinite SNR yields 0.
double crlb_sigma_d(double bandwidth_hz, double pulse_s, double snr_linear, double sample_rate);
double crlb_sigma_d(const WaveformParams& p, double snr_linear);

/// Correlation of rx against tx for non-negative lags 0..len(rx)-1:
/// out[n] = sum_k rx[n + k] conj(tx[k]).
Signal matched_filter(std::span<const Complex> rx, std::span<const Complex> tx);

/// Band-limited fractional delay by a frequency-domain phase ramp. Returns
/// `out_len` samples of tx delayed by `delay_samples`.
Signal fractional_delay(std::span<const Complex> tx, double delay_samples, std::size_t out_len);

/// Vertex offset (samples, relative to `peak`) of the parabola through
/// |corr| at peak-1, peak, peak+1.
double qls_vertex(std::span<const Complex> corr, std::size_t peak);

/// Deterministic QLS bias table. Knots are raw vertex offsets, sorted; values
/// are the additive corrections that map a raw offset to the true delay.
struct QlsLut {
  double oversampling_ratio = 0.0;  // f_s / B
  std::vector<double> raw_offsets;
  std::vector<double> corrections;

  /// Linear interpolation between knots; outside the knot span the table is
  /// extended by its odd symmetry, then clamped.
  double correction(double raw_offset) const;
};

QlsLut build_qls_lut(const TwoToneWaveform& wfm, int grid_points = 64);

/// peak_index + LUT-corrected parabolic vertex offset, in samples.
double qls_refine(std::span<const Complex> corr, std::size_t peak_index, const QlsLut& lut);

/// Lag of the largest |corr| in [first, last].
std::size_t peak_in_range(std::span<const Complex> corr, std::size_t first, std::size_t last);

/// Per-node constant clock bias during one synchronization epoch.
struct ClockModel {
  std::vector<double> offsets;  // epsilon_n, seconds
  double tick_period = 5e-9;    // 1 / f_s

  double local_time(int node, double true_time) const { return true_time + offsets.at(node); }
  double true_time(int node, double local) const { return local - offsets.at(node); }
  /// First clock edge at or after `local`.
  double next_edge(double local) const;
};

struct TimestampQuad {
  double t_tx_i = 0.0;  // node i local clock
  double t_rx_j = 0.0;  // node j local clock
  double t_tx_j = 0.0;  // node j local clock
  double t_rx_i = 0.0;  // node i local clock
};

/// One-way apparent time of flight; biased by the receiver-minus-sender clock offset.
double apparent_tof(double t_tx, double t_rx);

/// Mean of the two apparent times of flight; constant clock offsets cancel.
double two_way_tof(const TimestampQuad& q);

/// Receiver front end shared by every link that uses one waveform: the pulse,
/// its QLS table and the capture-window geometry.
struct RangingFrontEnd {
  TwoToneWaveform waveform;
  QlsLut lut;
  int guard_samples = 32;

  static std::shared_ptr<const RangingFrontEnd> make(const WaveformParams& p, int lut_points = 64);

  std::size_t window_length() const { return waveform.samples.size() + 2 * static_cast<std::size_t>(guard_samples); }
  /// Noise-free capture window with the pulse starting `delay_samples` in.
  Signal capture(double delay_samples) const;
  /// Delay of the pulse inside a capture window whose nominal start lag is
  /// guard_samples; the peak search spans half an ambiguity period around it.
  double estimate_delay(std::span<const Complex> window) const;
};

/// One synchronization epoch of the array.
struct RangingScenario {
  NodeLayout layout;
  AdjacencyMask links;
  ClockModel clocks;
  Eigen::MatrixXd link_snr;        // directed, linear; infinity means noise-free
  Eigen::MatrixXd hardware_delay;  // directed static delay i -> j, seconds
  Eigen::MatrixXd calibration;     // directed delay removed from receive stamps, seconds
  std::shared_ptr<const RangingFrontEnd> front_end;
  double turnaround_s = 500e-9;
  double epoch_start_s = 0.0;
};

/// Scenario with zero clock offsets and static delays, and link SNRs from the
/// inverse-square model referenced to `snr_h_linear`.
RangingScenario make_scenario(const NodeLayout& layout, const AdjacencyMask& links, double snr_h_linear,
                              std::shared_ptr<const RangingFrontEnd> front_end);

/// Simulates i -> j then j -> i at signal level and returns the four stamps.
TimestampQuad simulate_exchange(const RangingScenario& scn, int i, int j, Rng& rng);

/// Two-way range (meters) from one simulated exchange.
double simulate_range(const RangingScenario& scn, int i, int j, Rng& rng);

Edm sample_edm_signal_level(const RangingScenario& scn, Rng& rng);

struct StaticDelays {
  Eigen::MatrixXd hardware;     // directed, seconds
  Eigen::MatrixXd calibration;  // directed, seconds
};

struct StatisticalDiagnostics {
  int resampled = 0;
  int clamped = 0;
};

/// Fast Monte Carlo ranging: each observed link gets d + N(0, sigma_ij^2) with
/// sigma_ij the two-tone bound at the link's inverse-square SNR.
Edm sample_edm_statistical(const NodeLayout& layout, const AdjacencyMask& mask, double snr_h_linear,
                           const WaveformParams& wfm, Rng& rng, const StaticDelays* delays = nullptr,
                           StatisticalDiagnostics* diag = nullptr);

/// Mean squared distance over every node pair of the layout.
double mean_square_distance(const NodeLayout& layout);

}  // namespace arrayloc
