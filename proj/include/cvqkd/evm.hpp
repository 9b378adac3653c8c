#pragma once

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "cvqkd/moments.hpp"

namespace cvqkd {

using Mat6c = Eigen::Matrix<std::complex<double>, 6, 6>;

// Data of the effective-entanglement feasibility problem. B0 and B1 are the
// measured Bob-side moment matrices of the two conditional states, each
// weighted by the bit prior 1/2. The scalar c is the only off-diagonal
// (Alice-coherence) entry fixed by the source: c = <a1|a0>/2, the overlap of
// the two prepared (or nominally received) coherent states over 2. Every
// other off-diagonal entry is unobservable in a prepare&measure run and is
// left to the semidefinite completion search.
struct EvmProblem {
  Mat3c B0 = Mat3c::Zero();
  Mat3c B1 = Mat3c::Zero();
  std::complex<double> c{0.0, 0.0};
  double tolerance = 1e-7;
};

inline void validate_evm_problem(const EvmProblem& p) {
  if ((p.B0 - p.B0.adjoint()).norm() > 1e-9 || (p.B1 - p.B1.adjoint()).norm() > 1e-9) {
    throw std::invalid_argument("EvmProblem: B blocks must be Hermitian");
  }
  if (std::abs(p.c) > 0.5 + 1e-12) {
    throw std::invalid_argument("EvmProblem: |c| cannot exceed the prior 1/2");
  }
  if (!(p.tolerance > 0.0)) {
    throw std::invalid_argument("EvmProblem: tolerance must be positive");
  }
}

// Assembles the 6x6 expectation-value matrix
//   chi = [ B0   D  ]
//         [ D^H  B1 ]
// for a candidate completion D of the unobserved cross block. D's (0,0)
// entry is the physically fixed coherence c and must match.
inline Mat6c assemble_evm(const EvmProblem& p, const Mat3c& d) {
  if (std::abs(d(0, 0) - p.c) > 1e-12) {
    throw std::invalid_argument("assemble_evm: D[0,0] must equal the fixed coherence c");
  }
  Mat6c chi;
  chi.topLeftCorner<3, 3>() = 0.5 * (p.B0 + p.B0.adjoint());
  chi.bottomRightCorner<3, 3>() = 0.5 * (p.B1 + p.B1.adjoint());
  chi.topRightCorner<3, 3>() = d;
  chi.bottomLeftCorner<3, 3>() = d.adjoint();
  return chi;
}

// Partial transposition on Alice's two-dimensional index swaps the
// off-diagonal blocks: [[B0, D], [D^H, B1]] -> [[B0, D^H], [D, B1]].
// An involution; block-diagonal matrices are fixed points. Separable states
// keep the expectation-value matrix PSD under this map, so a completion
// search that fails on both cones certifies effective entanglement.
inline Mat6c partial_transpose_alice(const Mat6c& chi) {
  Mat6c out = chi;
  out.topRightCorner<3, 3>() = chi.bottomLeftCorner<3, 3>();
  out.bottomLeftCorner<3, 3>() = chi.topRightCorner<3, 3>();
  return out;
}

// Real symmetric embedding of a Hermitian matrix H = R + iS:
//   rho(H) = [ R  -S ]
//            [ S   R ]
// rho preserves Hermitian sums and doubles each eigenvalue's multiplicity,
// so H >= tI iff rho(H) >= tI. This is the standard route for feeding
// complex semidefinite constraints to a real-arithmetic solver.
inline Eigen::MatrixXd real_embedding(const Eigen::MatrixXcd& h) {
  const Eigen::Index n = h.rows();
  Eigen::MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.bottomRightCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  return out;
}

}
