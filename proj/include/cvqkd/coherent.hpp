#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace cvqkd {

// Complex amplitude of a coherent state, in square-root-photon units:
// |amplitude|^2 is the mean photon number.
struct Amplitude {
  double re = 0.0;
  double im = 0.0;

  Amplitude() = default;
  Amplitude(double r, double i) : re(r), im(i) {}
  // Real amplitudes are the common case for binary phase encoding.
  explicit Amplitude(double r) : re(r), im(0.0) {}
  explicit Amplitude(std::complex<double> z) : re(z.real()), im(z.imag()) {}

  std::complex<double> value() const { return {re, im}; }
  double norm_sq() const { return re * re + im * im; }
};

// Full complex overlap <b|a> of two coherent states,
//   <b|a> = exp(-|a|^2/2 - |b|^2/2 + conj(b)*a).
// Its magnitude is exp(-|a - b|^2 / 2) and the phase factor is
// exp((conj(b)*a - b*conj(a))/2); for real amplitudes the result is real,
// which is the only case a binary-modulated source exercises.
inline std::complex<double> coherent_overlap(const Amplitude& a, const Amplitude& b) {
  const std::complex<double> za = a.value();
  const std::complex<double> zb = b.value();
  return std::exp(-0.5 * a.norm_sq() - 0.5 * b.norm_sq() + std::conj(zb) * za);
}

// Husimi Q-function of the coherent state |center> evaluated at the
// phase-space point `probe`: Q(probe) = |<probe|center>|^2 / pi
//                                     = exp(-|probe - center|^2) / pi.
// Nonnegative, bounded by 1/pi, and attains 1/pi exactly at probe = center.
// Normalized so the integral over the complex plane (d^2 beta) is 1.
inline double q_value_coherent(const Amplitude& center, const Amplitude& probe) {
  const double dr = probe.re - center.re;
  const double di = probe.im - center.im;
  return std::exp(-(dr * dr + di * di)) / std::numbers::pi;
}

}
