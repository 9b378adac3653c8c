#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/units.hpp"

namespace cvqkd {

// Excess variances per axis with statistical errors. vacuum_var_used is the
// axis-averaged calibration variance the estimates were referenced to;
// `corrected` marks the electronic-noise worst case (reference shrunk by the
// electronic variance before taking the ratio).
struct ExcessNoiseReport {
  double e_x = 0.0;
  double e_y = 0.0;
  double stat_error_x = 0.0;
  double stat_error_y = 0.0;
  double vacuum_var_used = 1.0;
  bool corrected = false;
};

// Sample means, unbiased variances and symmetrized covariance of the
// heterodyne outcomes for one conditional state.
inline MomentSet estimate_conditional_moments(const std::vector<TrialRecord>& records, int bit) {
  double sx = 0.0, sy = 0.0;
  std::int64_t n = 0;
  for (const auto& r : records) {
    if (r.kind == TrialKind::Signal && r.bit == bit) {
      sx += r.outcome_x;
      sy += r.outcome_y;
      ++n;
    }
  }
  if (n < 2) throw std::invalid_argument("estimate_conditional_moments: need at least 2 records for the bit");
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);

  double vx = 0.0, vy = 0.0, cxy = 0.0;
  for (const auto& r : records) {
    if (r.kind == TrialKind::Signal && r.bit == bit) {
      const double dx = r.outcome_x - mx;
      const double dy = r.outcome_y - my;
      vx += dx * dx;
      vy += dy * dy;
      cxy += dx * dy;
    }
  }
  const double denom = static_cast<double>(n - 1);

  MomentSet m;
  m.mean_x = mx;
  m.mean_y = my;
  m.var_x = vx / denom;
  m.var_y = vy / denom;
  m.cov_xy = cxy / denom;
  m.convention = UnitConvention::ShotNoiseUnits;
  m.n_samples = n;
  return m;
}

// Moments of the interleaved vacuum calibration slots (mean should vanish;
// the variances are the shot-noise reference for excess-variance estimates).
inline MomentSet estimate_vacuum_moments(const std::vector<TrialRecord>& records) {
  double sx = 0.0, sy = 0.0;
  std::int64_t n = 0;
  for (const auto& r : records) {
    if (r.kind == TrialKind::VacuumCalibration) {
      sx += r.outcome_x;
      sy += r.outcome_y;
      ++n;
    }
  }
  if (n < 2) throw std::invalid_argument("estimate_vacuum_moments: need at least 2 calibration records");
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);

  double vx = 0.0, vy = 0.0, cxy = 0.0;
  for (const auto& r : records) {
    if (r.kind == TrialKind::VacuumCalibration) {
      const double dx = r.outcome_x - mx;
      const double dy = r.outcome_y - my;
      vx += dx * dx;
      vy += dy * dy;
      cxy += dx * dy;
    }
  }
  const double denom = static_cast<double>(n - 1);

  MomentSet m;
  m.mean_x = mx;
  m.mean_y = my;
  m.var_x = vx / denom;
  m.var_y = vy / denom;
  m.cov_xy = cxy / denom;
  m.convention = UnitConvention::ShotNoiseUnits;
  m.n_samples = n;
  return m;
}

// E = signal/vacuum - 1. Negative values are legitimate finite-sample
// outcomes, not a sign of anything nonclassical.
inline double excess_variance(double signal_var, double vacuum_var) {
  if (!(vacuum_var > 0.0)) throw std::invalid_argument("excess_variance: vacuum_var must be > 0");
  return signal_var / vacuum_var - 1.0;
}

// Gaussian variance-of-variance error, signal and reference contributions
// combined conservatively: (1+E)·(sqrt(2/n_s) + sqrt(2/n_v)).
inline double excess_variance_stat_error(std::int64_t n_signal, std::int64_t n_vacuum, double excess = 0.0) {
  if (n_signal < 2 || n_vacuum < 2) return 0.0;
  return (1.0 + excess) * (std::sqrt(2.0 / static_cast<double>(n_signal)) +
                           std::sqrt(2.0 / static_cast<double>(n_vacuum)));
}

// Worst case: the electronic noise is assumed to sit only in the shot-noise
// reference, so it is subtracted there and nowhere else.
inline double electronic_noise_correction(double signal_var, double vacuum_var, double electronic_var) {
  if (electronic_var < 0.0)
    throw std::invalid_argument("electronic_noise_correction: electronic_var must be >= 0");
  if (!(electronic_var < vacuum_var))
    throw std::invalid_argument("electronic_noise_correction: electronic_var must be < vacuum_var");
  return signal_var / (vacuum_var - electronic_var) - 1.0;
}

// Per-axis excess variances of a record batch against its own interleaved
// calibration slots. The per-bit variances are pooled (spread around the
// conditional means, not around the mixture mean). electronic_var > 0
// switches on the worst-case reference correction.
inline ExcessNoiseReport excess_noise_report(const std::vector<TrialRecord>& records,
                                             double electronic_var = 0.0) {
  const MomentSet m0 = estimate_conditional_moments(records, 0);
  const MomentSet m1 = estimate_conditional_moments(records, 1);
  const MomentSet vac = estimate_vacuum_moments(records);

  const double w0 = static_cast<double>(m0.n_samples - 1);
  const double w1 = static_cast<double>(m1.n_samples - 1);
  const double sig_vx = (w0 * m0.var_x + w1 * m1.var_x) / (w0 + w1);
  const double sig_vy = (w0 * m0.var_y + w1 * m1.var_y) / (w0 + w1);
  const std::int64_t n_sig = m0.n_samples + m1.n_samples;

  ExcessNoiseReport rep;
  if (electronic_var > 0.0) {
    rep.e_x = electronic_noise_correction(sig_vx, vac.var_x, electronic_var);
    rep.e_y = electronic_noise_correction(sig_vy, vac.var_y, electronic_var);
    rep.corrected = true;
  } else {
    rep.e_x = excess_variance(sig_vx, vac.var_x);
    rep.e_y = excess_variance(sig_vy, vac.var_y);
    rep.corrected = false;
  }
  rep.stat_error_x = excess_variance_stat_error(n_sig, vac.n_samples, rep.e_x);
  rep.stat_error_y = excess_variance_stat_error(n_sig, vac.n_samples, rep.e_y);
  rep.vacuum_var_used = 0.5 * (vac.var_x + vac.var_y);
  return rep;
}

}
