#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cvqkd/coherent.hpp"

namespace cvqkd {

// Default photon-number cutoff for the brute-force checks. Source amplitudes
// here satisfy |alpha| < 1, so 60 leaves truncation error far below any test
// tolerance (Poisson tail of a mean-4 distribution past n = 60).
inline constexpr int kDefaultFockTruncation = 60;

// A state expanded in the photon-number basis |0..n_trunc>.
struct FockVector {
  std::vector<std::complex<double>> coefficients;  // index n = photon number
  int n_trunc = 0;
};

// Coefficients of the coherent state |a> in the Fock basis:
//   c_n = exp(-|a|^2/2) * a^n / sqrt(n!).
// Computed by the stable recurrence c_n = c_{n-1} * a / sqrt(n). The guard
// |a|^2 <= n_trunc keeps the lost norm below ~1e-6 (Poisson tail beyond the
// cutoff); callers wanting oracle-grade accuracy use cutoffs well above |a|^2.
inline FockVector fock_coefficients(const Amplitude& a, int n_trunc = kDefaultFockTruncation) {
  if (n_trunc < 1) {
    throw std::domain_error("fock_coefficients: n_trunc must be >= 1");
  }
  if (a.norm_sq() > static_cast<double>(n_trunc)) {
    throw std::domain_error("fock_coefficients: |amplitude|^2 exceeds n_trunc; truncation would lose > 1e-6 norm");
  }
  FockVector v;
  v.n_trunc = n_trunc;
  v.coefficients.resize(static_cast<size_t>(n_trunc) + 1);
  std::complex<double> c = std::exp(std::complex<double>(-0.5 * a.norm_sq(), 0.0));
  v.coefficients[0] = c;
  const std::complex<double> z = a.value();
  for (int n = 1; n <= n_trunc; ++n) {
    c *= z / std::sqrt(static_cast<double>(n));
    v.coefficients[static_cast<size_t>(n)] = c;
  }
  return v;
}

inline double fock_norm_sq(const FockVector& v) {
  double s = 0.0;
  for (const auto& c : v.coefficients) s += std::norm(c);
  return s;
}

// Inner product <bra|ket>; vectors may have different cutoffs, the shorter
// one zero-pads.
inline std::complex<double> fock_inner(const FockVector& bra, const FockVector& ket) {
  const size_t n = std::min(bra.coefficients.size(), ket.coefficients.size());
  std::complex<double> s = 0.0;
  for (size_t i = 0; i < n; ++i) s += std::conj(bra.coefficients[i]) * ket.coefficients[i];
  return s;
}

inline Eigen::VectorXcd fock_to_eigen(const FockVector& v) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(v.coefficients.size()));
  for (size_t i = 0; i < v.coefficients.size(); ++i) out[static_cast<Eigen::Index>(i)] = v.coefficients[i];
  return out;
}

// Annihilation operator on the truncated basis: a|n> = sqrt(n)|n-1>.
inline Eigen::MatrixXcd annihilation_matrix(int n_trunc) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n_trunc + 1, n_trunc + 1);
  for (int n = 1; n <= n_trunc; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

// Quadrature operators fixed by X = (a + a^dag)/2, Y = (a - a^dag)/(2i),
// so [X, Y] = i/2 and the vacuum variance is 1/4 per axis.
inline Eigen::MatrixXcd quadrature_x_matrix(int n_trunc) {
  const Eigen::MatrixXcd a = annihilation_matrix(n_trunc);
  return 0.5 * (a + a.adjoint());
}

inline Eigen::MatrixXcd quadrature_y_matrix(int n_trunc) {
  const Eigen::MatrixXcd a = annihilation_matrix(n_trunc);
  return (a - a.adjoint()) / std::complex<double>(0.0, 2.0);
}

// Matrix element <phi|Op|psi> on the truncated basis.
inline std::complex<double> fock_matrix_element(const FockVector& phi, const Eigen::MatrixXcd& op,
                                                const FockVector& psi) {
  const Eigen::VectorXcd vphi = fock_to_eigen(phi);
  const Eigen::VectorXcd vpsi = fock_to_eigen(psi);
  return vphi.dot(op * vpsi);  // Eigen's dot conjugates the left argument
}

inline std::complex<double> fock_expectation(const Eigen::MatrixXcd& op, const FockVector& psi) {
  return fock_matrix_element(psi, op, psi);
}

// Von Neumann entropy (bits) of rho = sum_i w_i |psi_i><psi_i| built
// explicitly on the truncated basis and diagonalized. This is the
// brute-force reference the closed-form entropy expressions are tested
// against.
inline double fock_mixture_entropy_bits(const std::vector<double>& weights,
                                        const std::vector<FockVector>& states) {
  if (weights.size() != states.size() || states.empty()) {
    throw std::invalid_argument("fock_mixture_entropy_bits: weights/states mismatch");
  }
  size_t dim = 0;
  for (const auto& s : states) dim = std::max(dim, s.coefficients.size());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (size_t i = 0; i < states.size(); ++i) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    v.head(static_cast<Eigen::Index>(states[i].coefficients.size())) = fock_to_eigen(states[i]);
    rho += weights[i] * (v * v.adjoint());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  double h = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double lam = es.eigenvalues()[k];
    if (lam > 1e-300) h -= lam * std::log2(lam);
  }
  return h;
}

}
