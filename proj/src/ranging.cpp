#include "arrayloc/ranging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "arrayloc/error.hpp"
#include "arrayloc/snr.hpp"
#include "arrayloc/units.hpp"

namespace arrayloc {

namespace {

std::size_t fft_length(std::size_t min_len) {
  std::size_t n = 1;
  while (n < min_len) n <<= 1;
  return n;
}

Signal forward(const Signal& in) {
  thread_local Eigen::FFT<double> fft;
  Signal out;
  fft.fwd(out, in);
  return out;
}

Signal inverse(const Signal& in) {
  thread_local Eigen::FFT<double> fft;
  Signal out;
  fft.inv(out, in);
  return out;
}

Signal padded_spectrum(std::span<const Complex> x, std::size_t len) {
  Signal buf(len, Complex{});
  std::copy(x.begin(), x.end(), buf.begin());
  return forward(buf);
}

Signal delay_spectrum(const Signal& spectrum, double delay_samples, std::size_t out_len) {
  const std::size_t len = spectrum.size();
  Signal shifted(len);
  for (std::size_t k = 0; k < len; ++k) {
    const double f = (k < len / 2) ? static_cast<double>(k) / len : static_cast<double>(k) / len - 1.0;
    shifted[k] = spectrum[k] * std::polar(1.0, -2.0 * std::numbers::pi * f * delay_samples);
  }
  Signal out = inverse(shifted);
  out.resize(out_len);
  return out;
}

Signal correlate_spectra(const Signal& rx_spectrum, const Signal& tx_spectrum, std::size_t out_len) {
  Signal prod(rx_spectrum.size());
  for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = rx_spectrum[k] * std::conj(tx_spectrum[k]);
  Signal out = inverse(prod);
  out.resize(out_len);
  return out;
}

}  // namespace

TwoToneWaveform synth_two_tone(double bandwidth_hz, double pulse_s, double sample_rate, double rise_fall_s) {
  if (!(sample_rate > 0.0) || !(pulse_s > 0.0)) throw InvalidInput("pulse duration and sample rate must be positive");
  if (bandwidth_hz < 0.0) throw InvalidInput("tone separation must be non-negative");
  if (bandwidth_hz >= sample_rate) throw InvalidInput("tone separation must be below the sample rate");
  if (rise_fall_s < 0.0 || pulse_s < 10.0 * rise_fall_s) {
    throw InvalidInput("pulse must be at least ten rise/fall times long");
  }

  TwoToneWaveform w;
  w.params = {bandwidth_hz, pulse_s, sample_rate, rise_fall_s};
  w.degenerate = bandwidth_hz == 0.0;

  const auto n = static_cast<std::size_t>(std::llround(pulse_s * sample_rate));
  const auto ramp = static_cast<std::size_t>(std::llround(rise_fall_s * sample_rate));
  w.samples.resize(n);
  const double center = 0.5 * static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) - center) / sample_rate;
    double env = 1.0;
    const std::size_t from_edge = std::min(k, n - 1 - k);
    if (from_edge < ramp) {
      env = 0.5 - 0.5 * std::cos(std::numbers::pi * (static_cast<double>(from_edge) + 0.5) / ramp);
    }
    w.samples[k] = Complex(2.0 * std::cos(std::numbers::pi * bandwidth_hz * t) * env, 0.0);
  }

  double power = 0.0;
  std::size_t flat = 0;
  for (std::size_t k = ramp; k + ramp < n; ++k, ++flat) power += std::norm(w.samples[k]);
  if (flat == 0 || power == 0.0) throw InvalidInput("waveform has no flat region");
  const double scale = 1.0 / std::sqrt(power / static_cast<double>(flat));
  for (auto& s : w.samples) s *= scale;
  return w;
}

TwoToneWaveform synth_two_tone(const WaveformParams& p) {
  return synth_two_tone(p.bandwidth_hz, p.pulse_s, p.sample_rate, p.rise_fall_s);
}

double crlb_sigma_d(double bandwidth_hz, double pulse_s, double snr_linear, double sample_rate) {
  if (!(bandwidth_hz > 0.0) || !(pulse_s > 0.0) || !(snr_linear > 0.0) || !(sample_rate > 0.0)) {
    throw InvalidInput("CRLB arguments must all be positive");
  }
  if (std::isinf(snr_linear)) return 0.0;
  const double zeta = std::numbers::pi * bandwidth_hz;
  const double es_n0 = pulse_s * snr_linear * sample_rate;
  return kSpeedOfLight / std::sqrt(2.0 * zeta * zeta * es_n0);
}

double crlb_sigma_d(const WaveformParams& p, double snr_linear) {
  return crlb_sigma_d(p.bandwidth_hz, p.pulse_s, snr_linear, p.sample_rate);
}

Signal matched_filter(std::span<const Complex> rx, std::span<const Complex> tx) {
  if (tx.empty() || rx.empty()) throw InvalidInput("matched filter inputs must be non-empty");
  if (rx.size() < tx.size()) throw InvalidInput("received window is shorter than the template");
  const std::size_t len = fft_length(rx.size() + tx.size() - 1);
  return correlate_spectra(padded_spectrum(rx, len), padded_spectrum(tx, len), rx.size());
}

Signal fractional_delay(std::span<const Complex> tx, double delay_samples, std::size_t out_len) {
  if (tx.empty()) throw InvalidInput("cannot delay an empty signal");
  const std::size_t len = fft_length(std::max(out_len, tx.size()) + tx.size());
  return delay_spectrum(padded_spectrum(tx, len), delay_samples, out_len);
}

double qls_vertex(std::span<const Complex> corr, std::size_t peak) {
  if (peak == 0 || peak + 1 >= corr.size()) throw BoundaryError("correlation peak has no neighbor on one side");
  const double a = std::abs(corr[peak - 1]);
  const double b = std::abs(corr[peak]);
  const double c = std::abs(corr[peak + 1]);
  const double denom = a - 2.0 * b + c;
  if (denom == 0.0) return 0.0;
  return 0.5 * (a - c) / denom;
}

double QlsLut::correction(double raw_offset) const {
  if (raw_offsets.empty()) return 0.0;
  auto interp = [&](double x, double& out) {
    if (x < raw_offsets.front() || x > raw_offsets.back()) return false;
    auto hi = std::upper_bound(raw_offsets.begin(), raw_offsets.end(), x);
    if (hi == raw_offsets.end()) {
      out = corrections.back();
      return true;
    }
    const auto k = static_cast<std::size_t>(hi - raw_offsets.begin());
    const double x0 = raw_offsets[k - 1];
    const double x1 = raw_offsets[k];
    const double t = (x - x0) / (x1 - x0);
    out = corrections[k - 1] + t * (corrections[k] - corrections[k - 1]);
    return true;
  };
  double v = 0.0;
  if (interp(raw_offset, v)) return v;
  if (interp(-raw_offset, v)) return -v;
  return raw_offset > 0.0 ? -corrections.front() : corrections.front();
}

QlsLut build_qls_lut(const TwoToneWaveform& wfm, int grid_points) {
  if (grid_points < 16) throw InvalidInput("QLS table needs at least 16 grid points");
  constexpr std::size_t guard = 16;
  const std::size_t window = wfm.samples.size() + 2 * guard;
  const std::size_t len = fft_length(window + wfm.samples.size());
  const Signal tx_spectrum = padded_spectrum(wfm.samples, len);

  std::vector<std::pair<double, double>> knots;
  knots.reserve(grid_points);
  for (int g = 0; g < grid_points; ++g) {
    const double frac = -0.5 + static_cast<double>(g) / grid_points;
    const Signal rx = delay_spectrum(tx_spectrum, static_cast<double>(guard) + frac, window);
    const Signal corr = correlate_spectra(padded_spectrum(rx, len), tx_spectrum, window);
    const double raw = qls_vertex(corr, guard);
    knots.emplace_back(raw, frac - raw);
  }
  std::sort(knots.begin(), knots.end());

  QlsLut lut;
  lut.oversampling_ratio = wfm.params.bandwidth_hz > 0.0 ? wfm.params.sample_rate / wfm.params.bandwidth_hz
                                                         : std::numeric_limits<double>::infinity();
  for (const auto& [raw, corr] : knots) {
    lut.raw_offsets.push_back(raw);
    lut.corrections.push_back(corr);
  }
  return lut;
}

double qls_refine(std::span<const Complex> corr, std::size_t peak_index, const QlsLut& lut) {
  const double raw = qls_vertex(corr, peak_index);
  return static_cast<double>(peak_index) + raw + lut.correction(raw);
}

std::size_t peak_in_range(std::span<const Complex> corr, std::size_t first, std::size_t last) {
  if (corr.empty() || first > last || last >= corr.size()) throw InvalidInput("peak search range out of bounds");
  std::size_t best = first;
  double best_mag = std::norm(corr[first]);
  for (std::size_t k = first + 1; k <= last; ++k) {
    const double mag = std::norm(corr[k]);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  return best;
}

double ClockModel::next_edge(double local) const {
  return std::ceil(local / tick_period - 1e-9) * tick_period;
}

double apparent_tof(double t_tx, double t_rx) { return t_rx - t_tx; }

double two_way_tof(const TimestampQuad& q) {
  return 0.5 * ((q.t_rx_j - q.t_tx_i) + (q.t_rx_i - q.t_tx_j));
}

namespace {

struct FrontEndCache {
  std::size_t fft_len = 0;
  Signal tx_spectrum;
};

}  // namespace

// The FFT length and template spectrum are pure functions of the waveform, so
// they are recomputed lazily per thread instead of being stored in the struct.
static const FrontEndCache& cache_for(const RangingFrontEnd& fe) {
  thread_local const RangingFrontEnd* owner = nullptr;
  thread_local FrontEndCache cache;
  if (owner != &fe || cache.tx_spectrum.empty()) {
    cache.fft_len = fft_length(fe.window_length() + fe.waveform.samples.size());
    cache.tx_spectrum = padded_spectrum(fe.waveform.samples, cache.fft_len);
    owner = &fe;
  }
  return cache;
}

std::shared_ptr<const RangingFrontEnd> RangingFrontEnd::make(const WaveformParams& p, int lut_points) {
  auto fe = std::make_shared<RangingFrontEnd>();
  fe->waveform = synth_two_tone(p);
  fe->lut = build_qls_lut(fe->waveform, lut_points);
  return fe;
}

Signal RangingFrontEnd::capture(double delay_samples) const {
  const auto& cache = cache_for(*this);
  return delay_spectrum(cache.tx_spectrum, delay_samples, window_length());
}

double RangingFrontEnd::estimate_delay(std::span<const Complex> window) const {
  if (window.size() != window_length()) throw InvalidInput("capture window has the wrong length");
  const auto& cache = cache_for(*this);
  const Signal corr = correlate_spectra(padded_spectrum(window, cache.fft_len), cache.tx_spectrum, window.size());
  // The two-tone autocorrelation repeats every f_s/B lags; coarse alignment
  // places the true peak within half a period of the nominal lag.
  std::size_t half = static_cast<std::size_t>(guard_samples) - 1;
  if (!waveform.degenerate) {
    half = std::clamp<std::size_t>(static_cast<std::size_t>(0.5 * lut.oversampling_ratio), 1, half);
  }
  const auto nominal = static_cast<std::size_t>(guard_samples);
  const std::size_t peak = peak_in_range(corr, nominal - half, nominal + half);
  return qls_refine(corr, peak, lut);
}

double mean_square_distance(const NodeLayout& layout) {
  const auto& x = layout.coords();
  const int n = layout.count();
  if (n < 2) throw InvalidInput("mean squared distance needs at least two nodes");
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) sum += (x.col(i) - x.col(j)).squaredNorm();
  return sum / (0.5 * n * (n - 1));
}

RangingScenario make_scenario(const NodeLayout& layout, const AdjacencyMask& links, double snr_h_linear,
                              std::shared_ptr<const RangingFrontEnd> front_end) {
  const int n = layout.count();
  if (links.size() != n) throw InvalidInput("link mask and layout sizes differ");
  if (!front_end) throw InvalidInput("scenario needs a front end");

  RangingScenario scn;
  scn.layout = layout;
  scn.links = links;
  scn.clocks.offsets.assign(n, 0.0);
  scn.clocks.tick_period = 1.0 / front_end->waveform.params.sample_rate;
  scn.hardware_delay = Eigen::MatrixXd::Zero(n, n);
  scn.calibration = Eigen::MatrixXd::Zero(n, n);
  scn.link_snr = Eigen::MatrixXd::Zero(n, n);
  const LinkSnrModel model(snr_h_linear, mean_square_distance(layout));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) scn.link_snr(i, j) = link_snr(model, (layout.point(i) - layout.point(j)).norm());
  scn.front_end = std::move(front_end);
  return scn;
}

namespace {

// Local receive stamp at `to` for a pulse that leaves `from` at local time `t_tx`.
double receive_stamp(const RangingScenario& scn, int from, int to, double t_tx, Rng& rng) {
  const auto& fe = *scn.front_end;
  const double fs = fe.waveform.params.sample_rate;
  const double tof = (scn.layout.point(from) - scn.layout.point(to)).norm() / kSpeedOfLight;

  const double emitted = scn.clocks.true_time(from, t_tx);
  const double arrival_local = scn.clocks.local_time(to, emitted + tof + scn.hardware_delay(from, to));

  // The receiver samples on its own clock edges; the window opens guard
  // samples ahead of the edge preceding the arrival.
  const double arrival_samples = arrival_local * fs;
  const double window_start = std::floor(arrival_samples) - fe.guard_samples;
  Signal rx = fe.capture(arrival_samples - window_start);

  const double snr = scn.link_snr(from, to);
  if (std::isfinite(snr)) {
    std::normal_distribution<double> noise(0.0, std::sqrt(0.5 / snr));
    for (auto& s : rx) s += Complex(noise(rng), noise(rng));
  }

  const double delay = fe.estimate_delay(rx);
  return (window_start + delay) / fs - scn.calibration(from, to);
}

}  // namespace

TimestampQuad simulate_exchange(const RangingScenario& scn, int i, int j, Rng& rng) {
  const int n = scn.layout.count();
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw InvalidInput("exchange needs two distinct valid nodes");
  if (!scn.links.has(i, j)) {
    throw LinkUnavailable("link " + std::to_string(i) + "-" + std::to_string(j) + " is masked");
  }
  TimestampQuad q;
  q.t_tx_i = scn.clocks.next_edge(scn.clocks.local_time(i, scn.epoch_start_s));
  q.t_rx_j = receive_stamp(scn, i, j, q.t_tx_i, rng);
  q.t_tx_j = scn.clocks.next_edge(q.t_rx_j + scn.turnaround_s);
  q.t_rx_i = receive_stamp(scn, j, i, q.t_tx_j, rng);
  return q;
}

double simulate_range(const RangingScenario& scn, int i, int j, Rng& rng) {
  return two_way_tof(simulate_exchange(scn, i, j, rng)) * kSpeedOfLight;
}

Edm sample_edm_signal_level(const RangingScenario& scn, Rng& rng) {
  const int n = scn.layout.count();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : scn.links.edges()) {
    const double r = std::max(simulate_range(scn, i, j, rng), 0.0);
    d(i, j) = r * r;
    d(j, i) = r * r;
  }
  return Edm(std::move(d), scn.links);
}

Edm sample_edm_statistical(const NodeLayout& layout, const AdjacencyMask& mask, double snr_h_linear,
                           const WaveformParams& wfm, Rng& rng, const StaticDelays* delays,
                           StatisticalDiagnostics* diag) {
  const int n = layout.count();
  if (mask.size() != n) throw InvalidInput("mask and layout sizes differ");
  const LinkSnrModel model(snr_h_linear, mean_square_distance(layout));
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : mask.edges()) {
    const double dist = (layout.point(i) - layout.point(j)).norm();
    const double sigma = crlb_sigma_d(wfm, link_snr(model, dist));
    double bias = 0.0;
    if (delays != nullptr) {
      const auto& hw = delays->hardware;
      const auto& cal = delays->calibration;
      bias = 0.5 * kSpeedOfLight * ((hw(i, j) - cal(i, j)) + (hw(j, i) - cal(j, i)));
    }
    double est = dist + bias + sigma * gauss(rng);
    if (est < 0.0) {
      if (diag) ++diag->resampled;
      est = dist + bias + sigma * gauss(rng);
      if (est < 0.0) {
        if (diag) ++diag->clamped;
        est = 0.0;
      }
    }
    d(i, j) = est * est;
    d(j, i) = est * est;
  }
  return Edm(std::move(d), mask);
}

}  // namespace arrayloc
