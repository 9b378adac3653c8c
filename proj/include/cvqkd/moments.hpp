#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "cvqkd/units.hpp"

namespace cvqkd {

using Mat3c = Eigen::Matrix3cd;

// Operator moment matrix of a conditional state over the basis (1, X, Y),
// built from measured heterodyne moments:
//
//   M = [ 1      <X>          <Y>        ]
//       [ <X>    <X^2>        <XY>_s+i/4 ]
//       [ <Y>    <XY>_s-i/4   <Y^2>      ]
//
// The input moments describe heterodyne *outcomes*; the measurement adds one
// unit of vacuum per axis, so the operator second moments are recovered by
// subtracting 1/4 (Natural units) from the outcome variance. The i/4 entries
// carry the commutator [X, Y] = i/2, which is what separates a pure coherent
// state from classical Gaussian noise of the same width — without them no
// entanglement witness could fire.
inline Mat3c conditional_moment_matrix(const MomentSet& m_in) {
  validate_moment_set(m_in);
  const MomentSet m = to_natural(m_in);

  // Unphysical below the added-vacuum floor: the heterodyne outcome variance
  // of any state is at least 1/4 + Var(X) >= 1/4. A small statistical grace
  // window scales with the sample count (none for analytic moments).
  const double floor_tol = 10.0 * variance_rel_stat_error(m.n_samples) * 0.25;
  if (m.var_x < 0.25 - floor_tol || m.var_y < 0.25 - floor_tol) {
    throw std::domain_error("conditional_moment_matrix: outcome variance below the added-vacuum floor");
  }

  const double mx = m.mean_x;
  const double my = m.mean_y;
  const double xx = m.var_x - 0.25 + mx * mx;  // <X^2>
  const double yy = m.var_y - 0.25 + my * my;  // <Y^2>
  const double xy_s = m.cov_xy + mx * my;      // symmetrized <XY>_s

  Mat3c out;
  const std::complex<double> i4(0.0, 0.25);
  out << std::complex<double>(1.0, 0.0), std::complex<double>(mx, 0.0), std::complex<double>(my, 0.0),
      std::complex<double>(mx, 0.0), std::complex<double>(xx, 0.0), std::complex<double>(xy_s, 0.0) + i4,
      std::complex<double>(my, 0.0), std::complex<double>(xy_s, 0.0) - i4, std::complex<double>(yy, 0.0);
  return out;
}

// Closed-form moment matrix of a coherent state with complex amplitude
// (mx + i my): variances 1/4 per axis, vanishing symmetrized covariance.
// PSD with exactly one zero eigenvalue (the state saturates the uncertainty
// relation).
inline Mat3c coherent_state_moment_matrix(double mx, double my) {
  Mat3c out;
  const std::complex<double> i4(0.0, 0.25);
  out << std::complex<double>(1.0, 0.0), std::complex<double>(mx, 0.0), std::complex<double>(my, 0.0),
      std::complex<double>(mx, 0.0), std::complex<double>(mx * mx + 0.25, 0.0),
      std::complex<double>(mx * my, 0.0) + i4, std::complex<double>(my, 0.0),
      std::complex<double>(mx * my, 0.0) - i4, std::complex<double>(my * my + 0.25, 0.0);
  return out;
}

inline double min_eigenvalue(const Mat3c& m) {
  Eigen::SelfAdjointEigenSolver<Mat3c> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

// Nearest-PSD repair for measured moment matrices whose smallest eigenvalue
// is barely negative from finite-sample noise: eigenvalues are clipped at 0
// and the Frobenius distance of the correction is returned. Applies only
// when the defect is inside the statistical window (-10*stat_error, 0);
// anything else — including analytic injections, which carry stat_error 0 —
// passes through untouched so that genuinely nonclassical moment data keeps
// its meaning.
inline double project_psd_within_noise(Mat3c& m, double stat_error) {
  Eigen::SelfAdjointEigenSolver<Mat3c> es(m);
  const double lam_min = es.eigenvalues()[0];
  if (lam_min >= 0.0 || lam_min <= -10.0 * stat_error) return 0.0;
  Eigen::Vector3d lam = es.eigenvalues().cwiseMax(0.0);
  const Mat3c repaired = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
  const double dist = (repaired - m).norm();
  m = repaired;
  return dist;
}

}
