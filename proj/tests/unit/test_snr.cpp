#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "arrayloc/error.hpp"
#include "arrayloc/ranging.hpp"
#include "arrayloc/snr.hpp"
#include "arrayloc/units.hpp"

using namespace arrayloc;

namespace {

// L windows of a common unit-power signal plus independent complex noise.
Eigen::MatrixXcd windows(const Signal& s, int l, double noise_power, Rng& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * noise_power));
  Eigen::MatrixXcd w(static_cast<Eigen::Index>(s.size()), l);
  for (int c = 0; c < l; ++c)
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = s[static_cast<std::size_t>(r)] + Complex(g(rng), g(rng));
  return w;
}

Signal pulse(std::size_t n) {
  Signal s = synth_two_tone(40e6, 10e-6, 200e6, 50e-9).samples;
  s.resize(n);
  return s;
}

double mean_power(const Signal& s) {
  double p = 0.0;
  for (const auto& v : s) p += std::norm(v);
  return p / static_cast<double>(s.size());
}

}  // namespace

TEST_SUITE("snr") {

TEST_CASE("inverse-square link snr") {
  const LinkSnrModel m(db_to_linear(34.0), 4.0);
  CHECK(link_snr(m, 2.0) == doctest::Approx(m.snr_h));
  CHECK(linear_to_db(link_snr(m, 1.0)) == doctest::Approx(34.0 + 10.0 * std::log10(4.0)));
  CHECK(linear_to_db(link_snr(m, 1.0)) == doctest::Approx(40.02).epsilon(1e-3));
  CHECK_THROWS_AS(link_snr(m, 0.0), InvalidInput);
  CHECK_THROWS_AS(LinkSnrModel(0.0, 4.0), InvalidInput);
}

TEST_CASE("harmonic mean") {
  const std::vector<double> a{2.0, 2.0}, b{1.0, 3.0};
  CHECK(harmonic_mean_snr(a) == doctest::Approx(2.0));
  CHECK(harmonic_mean_snr(b) == doctest::Approx(1.5));
  CHECK_THROWS_AS(harmonic_mean_snr(std::vector<double>{}), InvalidInput);
}

TEST_CASE("link snrs reproduce the array harmonic mean") {
  Rng rng = make_rng(31, 0);
  for (int t = 0; t < 200; ++t) {
    const int n = 3 + static_cast<int>(uniform01(rng) * 20);
    const NodeLayout l = random_box_layout(n, 5.0, rng);
    const double snr_h = db_to_linear(20.0 + 20.0 * uniform01(rng));
    const LinkSnrModel m(snr_h, mean_square_distance(l));
    std::vector<double> links;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) links.push_back(link_snr(m, (l.point(i) - l.point(j)).norm()));
    REQUIRE(harmonic_mean_snr(links) == doctest::Approx(snr_h).epsilon(1e-12));
  }
}

TEST_CASE("blind estimate on a noise-free rank-one capture") {
  Rng rng = make_rng(1, 0);
  const Signal s = pulse(500);
  const BlindSnrEstimate e = blind_snr_estimate(SampleMatrix(windows(s, 8, 0.0, rng)));
  CHECK(e.noise_power < 1e-12);
  CHECK(e.signal_power == doctest::Approx(mean_power(s)).epsilon(1e-9));
}

TEST_CASE("blind estimate on white noise") {
  Rng rng = make_rng(2, 0);
  const Signal zero(2000, Complex{});
  const BlindSnrEstimate e = blind_snr_estimate(SampleMatrix(windows(zero, 32, 2.0, rng)));
  CHECK(e.noise_power == doctest::Approx(2.0).epsilon(0.1));
  // only the L-fold spread of the top noise eigenvalue is left over
  CHECK(e.snr < 0.02);
}

TEST_CASE("blind estimate of a 34 dB two-tone capture") {
  Rng rng = make_rng(3, 0);
  const Signal s = pulse(2000);
  const double truth_db = 34.0;
  const double noise = mean_power(s) / db_to_linear(truth_db);
  double sum_db = 0.0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    sum_db += linear_to_db(blind_snr_estimate(SampleMatrix(windows(s, 32, noise, rng))).snr);
  }
  CHECK(std::abs(sum_db / trials - truth_db) < 1.0);
}

TEST_CASE("noise estimate does not depend on signal power") {
  const Signal s = pulse(2000);
  std::vector<double> pn;
  for (double gain : {0.1, 1.0, 10.0}) {
    Signal scaled = s;
    for (auto& v : scaled) v *= gain;
    Rng rng = make_rng(4, 0);  // same noise each time
    pn.push_back(blind_snr_estimate(SampleMatrix(windows(scaled, 32, 0.01, rng))).noise_power);
  }
  CHECK(pn[0] == doctest::Approx(0.01).epsilon(0.1));
  CHECK(pn[1] == doctest::Approx(pn[0]).epsilon(0.02));
  CHECK(pn[2] == doctest::Approx(pn[0]).epsilon(0.02));
}

TEST_CASE("common complex scale leaves the snr unchanged") {
  Rng rng = make_rng(5, 0);
  const Eigen::MatrixXcd w = windows(pulse(2000), 32, 1e-3, rng);
  const double base = blind_snr_estimate(SampleMatrix(w)).snr;
  const double scaled = blind_snr_estimate(SampleMatrix(w * Complex(3.7, -1.2))).snr;
  CHECK(std::abs(scaled / base - 1.0) <= 1e-12);
}

TEST_CASE("needs two windows") {
  CHECK_THROWS_AS(blind_snr_estimate(SampleMatrix(Eigen::MatrixXcd::Ones(10, 1))), InvalidInput);
}

}
