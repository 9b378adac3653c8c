#pragma once

#include <cmath>
#include <stdexcept>

namespace cvqkd {

// Binary Shannon entropy in bits. 0*log(0) is taken as 0, so the function is
// continuous on the closed interval and symmetric under p <-> 1-p.
inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("binary_entropy: p must lie in [0, 1]");
  }
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

// Von Neumann entropy (bits) of a mixture of two pure states,
//   rho = prior*|u><u| + (1-prior)*|v><v|,  |<u|v>| = overlap_mag.
// The mixture has rank <= 2 with eigenvalues
//   lambda_pm = (1 +- sqrt(1 - 4*prior*(1-prior)*(1 - overlap_mag^2))) / 2,
// so S(rho) = H2(lambda_plus). This is the Holevo quantity of a binary
// ensemble of pure states measured in full generality; for equal priors it
// bounds what any observer can learn about which of the two states was sent.
inline double holevo_two_pure(double overlap_mag, double prior) {
  if (!(overlap_mag >= 0.0 && overlap_mag <= 1.0)) {
    throw std::domain_error("holevo_two_pure: overlap_mag must lie in [0, 1]");
  }
  if (!(prior >= 0.0 && prior <= 1.0)) {
    throw std::domain_error("holevo_two_pure: prior must lie in [0, 1]");
  }
  const double disc = 1.0 - 4.0 * prior * (1.0 - prior) * (1.0 - overlap_mag * overlap_mag);
  // disc >= 0 always; clamp shields the sqrt from roundoff when prior = 1/2
  // and overlap_mag = 0.
  const double root = std::sqrt(disc < 0.0 ? 0.0 : disc);
  const double lambda_plus = 0.5 * (1.0 + root);
  return binary_entropy(lambda_plus);
}

}
