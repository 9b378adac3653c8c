#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace cvqkd {

// Two unit conventions coexist:
//  - Natural: quadratures normalized by [X, Y] = i/2, vacuum quadrature
//    variance 1/4 per axis, heterodyne-measured vacuum variance 1/2 per axis
//    (the measurement adds one unit of vacuum).
//  - ShotNoiseUnits: outcomes rescaled so the heterodyne-measured vacuum
//    variance is exactly 1 per axis. All public reports use this convention.
enum class UnitConvention { Natural, ShotNoiseUnits };

// Scale that maps Natural heterodyne outcomes to shot-noise units:
// x_snu = sqrt(2) * x_nat, turning the vacuum's measured variance 1/2 into 1.
// Derived once from the quadrature normalization above and pinned by the
// Fock oracle in the unit tests.
inline constexpr double kSnuScale = std::numbers::sqrt2;

// First and second moments of the two heterodyne outcome axes for one
// conditional state. n_samples = 0 marks analytic (noise-free) moments;
// the statistical error of a variance estimate is then taken as 0.
struct MomentSet {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  double cov_xy = 0.0;  // symmetrized sample covariance
  UnitConvention convention = UnitConvention::ShotNoiseUnits;
  std::int64_t n_samples = 0;
};

inline void validate_moment_set(const MomentSet& m) {
  if (!(m.var_x >= 0.0) || !(m.var_y >= 0.0)) {
    throw std::domain_error("MomentSet: variances must be nonnegative");
  }
  // Cauchy-Schwarz with a sliver of roundoff headroom.
  if (std::abs(m.cov_xy) > std::sqrt(m.var_x * m.var_y) * (1.0 + 1e-12) + 1e-300) {
    throw std::domain_error("MomentSet: |cov| exceeds sqrt(var_x*var_y)");
  }
}

// Linear, exactly invertible rescaling. The excess variance E is a ratio of
// variances and therefore identical in both conventions.
inline MomentSet to_natural(const MomentSet& m) {
  if (m.convention == UnitConvention::Natural) return m;
  MomentSet out = m;
  out.mean_x /= kSnuScale;
  out.mean_y /= kSnuScale;
  out.var_x /= 2.0;
  out.var_y /= 2.0;
  out.cov_xy /= 2.0;
  out.convention = UnitConvention::Natural;
  return out;
}

inline MomentSet to_snu(const MomentSet& m) {
  if (m.convention == UnitConvention::ShotNoiseUnits) return m;
  MomentSet out = m;
  out.mean_x *= kSnuScale;
  out.mean_y *= kSnuScale;
  out.var_x *= 2.0;
  out.var_y *= 2.0;
  out.cov_xy *= 2.0;
  out.convention = UnitConvention::ShotNoiseUnits;
  return out;
}

// Relative statistical error of an n-sample Gaussian variance estimate,
// var(s^2)/var^2 = 2/(n-1) ~ 2/n. Zero for analytic moments.
inline double variance_rel_stat_error(std::int64_t n_samples) {
  if (n_samples < 2) return 0.0;
  return std::sqrt(2.0 / static_cast<double>(n_samples));
}

}
