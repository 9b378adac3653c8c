#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/rng.hpp"

namespace cvqkd {

inline void validate_detector_config(const DetectorConfig& det) {
  if (!(det.sample_rate > 0.0))
    throw std::invalid_argument("DetectorConfig: sample_rate must be > 0");
  if (!(det.pulse_duration > 0.0))
    throw std::invalid_argument("DetectorConfig: pulse_duration must be > 0");
  if (det.samples_per_pulse < 1)
    throw std::invalid_argument(
        "DetectorConfig: samples_per_pulse must be >= 1");
  const double expected = det.sample_rate * det.pulse_duration;
  if (std::abs(expected - static_cast<double>(det.samples_per_pulse)) > 0.5)
    throw std::invalid_argument(
        "DetectorConfig: samples_per_pulse must equal "
        "sample_rate * pulse_duration");
  if (!(det.electronic_noise_rel >= 0.0))
    throw std::invalid_argument(
        "DetectorConfig: electronic_noise_rel must be >= 0");
  if (!(det.lowpass_cutoff >= 0.0))
    throw std::invalid_argument("DetectorConfig: lowpass_cutoff must be >= 0");
  if (!(det.quantum_efficiency > 0.0 && det.quantum_efficiency <= 1.0))
    throw std::invalid_argument(
        "DetectorConfig: quantum_efficiency must lie in (0,1]");
}

// AR(1) pole of a first-order low-pass discretized at the detector's sample
// rate.
inline double lowpass_pole(const DetectorConfig& det) {
  return std::exp(-2.0 * std::numbers::pi * det.lowpass_cutoff /
                  det.sample_rate);
}

// One detected pulse at the difference output, normalized so shot noise has
// unit variance per sample. The modulation enters as a rectangular envelope
// scaled by sqrt(quantum_efficiency); the electronic noise carries the
// configured power ratio and is shaped by the low-pass (an AR(1) process,
// started in its stationary distribution so the first sample is not
// special). Shot noise is white: the normalization is defined after
// whitening, which is what makes the per-sample unit variance exact.
inline std::vector<double> simulate_pulse_waveform(
    const DetectorConfig& det, double modulation_amplitude,
    std::uint64_t rng_seed, std::uint64_t pulse_index = 0) {
  validate_detector_config(det);
  const double a = lowpass_pole(det);
  const double sigma_e = std::sqrt(det.electronic_noise_rel);
  const double innovation = sigma_e * std::sqrt(1.0 - a * a);
  const double mean =
      std::sqrt(det.quantum_efficiency) * modulation_amplitude;

  auto g = make_named_stream(rng_seed, "waveform", pulse_index);
  std::vector<double> trace(static_cast<std::size_t>(det.samples_per_pulse));
  double elec = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto z = gaussian_pair(g);
    elec = i == 0 ? sigma_e * z.z1 : a * elec + innovation * z.z1;
    trace[i] = mean + z.z0 + elec;
  }
  return trace;
}

// Pulse amplitude estimator matching the idealized sampler: average the
// trace and undo the efficiency scaling. Unbiased for the modulation
// amplitude; averaging the white shot noise shrinks its variance by the
// sample count, while the low-passed electronic noise averages down more
// slowly (its samples are positively correlated).
inline double integrate_waveform(const std::vector<double>& trace,
                                 const DetectorConfig& det) {
  validate_detector_config(det);
  if (trace.empty())
    throw std::invalid_argument("integrate_waveform: empty trace");
  double sum = 0.0;
  for (double v : trace) sum += v;
  return sum / (static_cast<double>(trace.size()) *
                std::sqrt(det.quantum_efficiency));
}

// Variance of the trace average for a unit-shot detector, in closed form:
// white shot contributes 1/n, the AR(1) electronic noise contributes its
// full double sum of geometrically decaying correlations.
inline double waveform_mean_variance(const DetectorConfig& det) {
  validate_detector_config(det);
  const double a = lowpass_pole(det);
  const double n = static_cast<double>(det.samples_per_pulse);
  double corr_sum = n;
  double ak = 1.0;
  for (int k = 1; k < det.samples_per_pulse; ++k) {
    ak *= a;
    corr_sum += 2.0 * (n - k) * ak;
  }
  return (1.0 / n) + det.electronic_noise_rel * corr_sum / (n * n);
}

}  // namespace cvqkd
