#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/estimation.hpp"
#include "cvqkd/histogram.hpp"
#include "cvqkd/units.hpp"

using namespace cvqkd;

namespace {

std::vector<TrialRecord> simulated_batch(double overlap, double t, double xi,
                                         std::int64_t pulses,
                                         std::uint64_t seed, int slots = 5) {
  SourceConfig src;
  src.target_overlap = overlap;
  src.pulse_count = pulses;
  src.vacuum_slots_per_signal = slots;
  src.seed = seed;
  ChannelConfig ch;
  ch.transmission = t;
  ch.excess_noise = xi;
  return sample_heterodyne_batch(src, ch);
}

std::vector<TrialRecord> only_kind(const std::vector<TrialRecord>& records,
                                   TrialKind kind) {
  std::vector<TrialRecord> out;
  for (const auto& r : records)
    if (r.kind == kind) out.push_back(r);
  return out;
}

double histogram_volume(const Histogram2D& h) {
  const double ax = h.x_edges[1] - h.x_edges[0];
  const double ay = h.y_edges[1] - h.y_edges[0];
  double v = 0.0;
  for (const auto& row : h.density)
    for (double d : row) v += d * ax * ay;
  return v;
}

// mean and Sheppard-corrected variance of a 1-D histogram, for comparison
// against moments of the underlying samples
struct BinnedMoments {
  double mean = 0.0;
  double var = 0.0;
};

BinnedMoments binned_moments(const Histogram1D& h) {
  const double w = h.edges[1] - h.edges[0];
  BinnedMoments out;
  for (std::size_t i = 0; i < h.density.size(); ++i)
    out.mean += 0.5 * (h.edges[i] + h.edges[i + 1]) * h.density[i] * w;
  for (std::size_t i = 0; i < h.density.size(); ++i) {
    const double c = 0.5 * (h.edges[i] + h.edges[i + 1]);
    out.var += (c - out.mean) * (c - out.mean) * h.density[i] * w;
  }
  out.var -= w * w / 12.0;  // midpoint binning adds w^2/12
  return out;
}

}  // namespace

TEST_CASE("conditional moment estimation", "[estimation]") {
  const auto records = simulated_batch(0.51, 1.0, 0.0, 125000, 41001, 1);
  const double alpha = amplitude_for_overlap(0.51);

  SECTION("plus state mean within standard error") {
    const auto m = estimate_conditional_moments(records, 1);
    REQUIRE(m.n_samples > 50000);
    const double n = static_cast<double>(m.n_samples);
    CHECK(std::abs(m.mean_x - kSnuScale * alpha) < 4.0 * std::sqrt(1.0 / n));
    CHECK(std::abs(m.mean_y) < 4.0 * std::sqrt(1.0 / n));
    CHECK(std::abs(m.cov_xy) < 4.0 * std::sqrt(1.0 / n));
    CHECK(m.convention == UnitConvention::ShotNoiseUnits);
  }

  SECTION("minus state mirrors the plus state") {
    const auto m = estimate_conditional_moments(records, 0);
    const double n = static_cast<double>(m.n_samples);
    CHECK(std::abs(m.mean_x + kSnuScale * alpha) < 4.0 * std::sqrt(1.0 / n));
    CHECK(std::abs(m.var_x - 1.0) < 4.0 * std::sqrt(2.0 / n));
  }

  SECTION("permutation invariance") {
    auto shuffled = records;
    std::mt19937_64 g(99);
    std::shuffle(shuffled.begin(), shuffled.end(), g);
    const auto m1 = estimate_conditional_moments(records, 0);
    const auto m2 = estimate_conditional_moments(shuffled, 0);
    CHECK(m1.mean_x == Catch::Approx(m2.mean_x).margin(1e-12));
    CHECK(m1.var_x == Catch::Approx(m2.var_x).margin(1e-12));
    CHECK(m1.cov_xy == Catch::Approx(m2.cov_xy).margin(1e-12));
    CHECK(m1.n_samples == m2.n_samples);
  }

  SECTION("needs at least two records of the bit") {
    std::vector<TrialRecord> empty;
    CHECK_THROWS_AS(estimate_conditional_moments(empty, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_vacuum_moments(empty), std::invalid_argument);
  }
}

TEST_CASE("excess variance arithmetic", "[estimation]") {
  SECTION("definition and errors") {
    CHECK(excess_variance(1.0, 1.0) == Catch::Approx(0.0));
    CHECK(excess_variance(1.008, 1.0) == Catch::Approx(0.008));
    CHECK(excess_variance(0.97, 1.0) == Catch::Approx(-0.03));
    CHECK_THROWS_AS(excess_variance(1.0, 0.0), std::invalid_argument);
  }

  SECTION("statistical error at the reference sample sizes") {
    // 125000 signals per conditional state against 1.25e6 calibration slots
    const double se = excess_variance_stat_error(125000, 1250000);
    CHECK(se == Catch::Approx(0.0052649).margin(1e-6));
    // the half-percent working figure
    CHECK(se == Catch::Approx(0.005).margin(3e-4));
    // scales with the measured excess
    CHECK(excess_variance_stat_error(125000, 1250000, 0.5) ==
          Catch::Approx(1.5 * se).margin(1e-12));
    CHECK(excess_variance_stat_error(0, 100) == 0.0);
    CHECK(excess_variance_stat_error(100, 1) == 0.0);
  }

  SECTION("electronic-noise worst case") {
    CHECK(electronic_noise_correction(1.002, 1.0, 0.0) ==
          Catch::Approx(excess_variance(1.002, 1.0)));
    // a raw 0.2% with an electronic share of 0.0748 of the vacuum reference
    // inflates to 8.3%
    CHECK(electronic_noise_correction(1.002, 1.0, 0.0748) ==
          Catch::Approx(0.083).margin(2e-4));
    CHECK_THROWS_AS(electronic_noise_correction(1.0, 1.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(electronic_noise_correction(1.0, 1.0, -0.1),
                    std::invalid_argument);
    // never below the raw value
    for (double e : {0.0, 0.02, 0.05}) {
      CHECK(electronic_noise_correction(1.01, 1.0, e) >=
            excess_variance(1.01, 1.0) - 1e-15);
    }
  }
}

TEST_CASE("excess noise recovery from simulated batches", "[estimation]") {
  int i = 0;
  for (double xi : {0.0, 0.05, 0.2}) {
    // one million signal pulses keeps three standard errors below a percent
    const auto records =
        simulated_batch(0.51, 0.65, xi, 1000000, 42001 + i++, 1);
    const auto report = excess_noise_report(records);
    INFO("xi = " << xi);
    REQUIRE(report.stat_error_x > 0.0);
    REQUIRE(report.stat_error_y > 0.0);
    CHECK(std::abs(report.e_x - xi) < 3.0 * report.stat_error_x);
    CHECK(std::abs(report.e_y - xi) < 3.0 * report.stat_error_y);
    CHECK(report.corrected == false);
    CHECK(report.vacuum_var_used == Catch::Approx(1.0).margin(0.01));
  }
}

TEST_CASE("electronic correction propagates into the report", "[estimation]") {
  const auto records = simulated_batch(0.51, 0.457, 0.0, 200000, 43001, 5);
  const auto raw = excess_noise_report(records);
  const auto corrected = excess_noise_report(records, 0.0748);
  CHECK(corrected.corrected);
  CHECK_FALSE(raw.corrected);
  CHECK(corrected.e_x > raw.e_x);
  CHECK(corrected.e_y > raw.e_y);

  // reproduce from the building blocks: pooled per-bit variances against the
  // per-axis calibration variance
  const auto m0 = estimate_conditional_moments(records, 0);
  const auto m1 = estimate_conditional_moments(records, 1);
  const auto vac = estimate_vacuum_moments(records);
  const double w0 = static_cast<double>(m0.n_samples - 1);
  const double w1 = static_cast<double>(m1.n_samples - 1);
  const double sig_vx = (w0 * m0.var_x + w1 * m1.var_x) / (w0 + w1);
  CHECK(corrected.e_x ==
        Catch::Approx(electronic_noise_correction(sig_vx, vac.var_x, 0.0748))
            .margin(1e-12));
  CHECK(raw.e_x ==
        Catch::Approx(excess_variance(sig_vx, vac.var_x)).margin(1e-12));
  CHECK(raw.vacuum_var_used ==
        Catch::Approx(0.5 * (vac.var_x + vac.var_y)).margin(1e-12));
}

TEST_CASE("q-function histogram normalization and peaks", "[estimation]") {
  SECTION("volume is one regardless of binning and input") {
    const auto records = simulated_batch(0.51, 1.0, 0.0, 2000, 51001, 2);
    for (double w : {0.07, 0.1, 0.25}) {
      const auto h = build_q_histogram(records, w);
      CHECK(histogram_volume(h) == Catch::Approx(1.0).margin(1e-12));
    }
    CHECK_THROWS_AS(build_q_histogram(records, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_q_histogram({}, 0.1), std::invalid_argument);
  }

  SECTION("vacuum peak matches the analytic Gaussian height") {
    const auto records = simulated_batch(0.51, 1.0, 0.0, 200000, 51002, 5);
    const auto vac = only_kind(records, TrialKind::VacuumCalibration);
    REQUIRE(vac.size() == 1000000);
    const auto h = build_q_histogram(vac, 0.1);
    const double analytic = 1.0 / (2.0 * std::numbers::pi);
    CHECK(histogram_peak(h) == Catch::Approx(analytic).epsilon(0.05));
  }

  SECTION("signal mixture peak sits below vacuum and rises with loss") {
    const auto vac_records = simulated_batch(0.51, 1.0, 0.0, 80000, 51003, 5);
    const auto vac = only_kind(vac_records, TrialKind::VacuumCalibration);
    const double vacuum_peak = histogram_peak(build_q_histogram(vac, 0.1));
    const double alpha = amplitude_for_overlap(0.51);

    // one seed for the whole sweep: the same underlying noise draws at every
    // transmission, so the peaks move smoothly as the humps slide together
    double prev_peak = 0.0;
    for (double t : {1.0, 0.65, 0.457}) {
      const auto sig = only_kind(
          simulated_batch(0.51, t, 0.0, 2000000, 51004, 0),
          TrialKind::Signal);
      const double peak = histogram_peak(build_q_histogram(sig, 0.1));
      const double m = kSnuScale * std::sqrt(t) * alpha;
      // the balanced mixture is unimodal for m <= 1 with its mode at the
      // origin
      const double analytic = std::exp(-0.5 * m * m) / (2.0 * std::numbers::pi);
      INFO("T = " << t);
      CHECK(peak == Catch::Approx(analytic).epsilon(0.08));
      CHECK(peak < vacuum_peak);
      CHECK(peak > prev_peak);
      prev_peak = peak;
    }
  }
}

TEST_CASE("marginal histograms", "[estimation]") {
  SECTION("vacuum marginal variance") {
    const auto records = simulated_batch(0.51, 1.0, 0.0, 50000, 52001, 4);
    const auto vac = only_kind(records, TrialKind::VacuumCalibration);
    const auto h = marginal_histogram(vac, Axis::X);
    const double w = h.edges[1] - h.edges[0];
    double total = 0.0;
    for (double d : h.density) total += d * w;
    CHECK(total == Catch::Approx(1.0).margin(1e-12));
    const auto bm = binned_moments(h);
    const double n = static_cast<double>(vac.size());
    CHECK(std::abs(bm.mean) < 4.0 * std::sqrt(1.0 / n) + 1e-3);
    CHECK(std::abs(bm.var - 1.0) < 3.0 * std::sqrt(2.0 / n) + 1e-3);
  }

  SECTION("mixture marginal matches the two-Gaussian variance") {
    const double t = 0.457, o = 0.50;
    const auto sig = only_kind(simulated_batch(o, t, 0.0, 300000, 52002, 0),
                               TrialKind::Signal);
    const double m = kSnuScale * std::sqrt(t) * amplitude_for_overlap(o);
    // balanced mixture along x: unit component variance plus the squared
    // mean separation
    const double expect = 1.0 + m * m;
    const auto bx = binned_moments(marginal_histogram(sig, Axis::X));
    const auto by = binned_moments(marginal_histogram(sig, Axis::Y));
    const double n = static_cast<double>(sig.size());
    CHECK(std::abs(bx.var - expect) <
          4.0 * expect * std::sqrt(2.0 / n) + 1e-3);
    // the y marginal keeps the vacuum width
    CHECK(std::abs(by.var - 1.0) < 4.0 * std::sqrt(2.0 / n) + 1e-3);
  }

  SECTION("single conditional state mean") {
    const double t = 0.65, o = 0.51;
    const auto records = simulated_batch(o, t, 0.0, 200000, 52003, 0);
    std::vector<TrialRecord> plus;
    for (const auto& r : records)
      if (r.kind == TrialKind::Signal && r.bit == 1) plus.push_back(r);
    const auto bm = binned_moments(marginal_histogram(plus, Axis::X));
    const double want = kSnuScale * std::sqrt(t) * amplitude_for_overlap(o);
    CHECK(std::abs(bm.mean - want) <
          4.0 * std::sqrt(1.0 / static_cast<double>(plus.size())) + 1e-3);
  }

  SECTION("rejects bad input") {
    CHECK_THROWS_AS(marginal_histogram({}, Axis::X), std::invalid_argument);
    const auto records = simulated_batch(0.51, 1.0, 0.0, 100, 52004, 0);
    CHECK_THROWS_AS(marginal_histogram(records, Axis::X, -0.1),
                    std::invalid_argument);
  }
}
