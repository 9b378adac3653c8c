#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "cvqkd/coherent.hpp"
#include "cvqkd/rng.hpp"
#include "cvqkd/units.hpp"

namespace cvqkd {

// Alice's binary coherent-state source. Exactly one of alpha /
// target_overlap must be set; the bit prior is fixed at 1/2.
struct SourceConfig {
  std::optional<double> alpha;
  std::optional<double> target_overlap;
  std::int64_t pulse_count = 0;
  int vacuum_slots_per_signal = 5;
  std::uint64_t seed = 0;
};

struct ChannelConfig {
  double transmission = 1.0;   // T in (0, 1]
  double excess_noise = 0.0;   // xi >= 0, SNU, split equally between axes
  // Optional asymmetric override; when set, the axis uses this instead of
  // excess_noise. The symmetric model is the default.
  std::optional<double> excess_noise_x;
  std::optional<double> excess_noise_y;
};

enum class TrialKind : std::uint8_t { Signal, VacuumCalibration };

struct TrialRecord {
  std::int64_t index = 0;
  TrialKind kind = TrialKind::Signal;
  int bit = -1;                // -1 for calibration records (no bit)
  double sent_amplitude = 0.0; // 0 for calibration records
  double outcome_x = 0.0;      // SNU
  double outcome_y = 0.0;      // SNU
};

struct DetectorConfig {
  double sample_rate = 20e6;        // samples/s
  double pulse_duration = 5e-6;     // s
  int samples_per_pulse = 100;      // = sample_rate * pulse_duration
  double electronic_noise_rel = std::pow(10.0, -1.4);  // power ratio vs shot noise
  double lowpass_cutoff = 2e6;      // Hz, first-order low pass on the electronic noise
  double quantum_efficiency = 0.91; // applied in the waveform model only
};

inline void validate_source_config(const SourceConfig& src) {
  if (src.alpha.has_value() == src.target_overlap.has_value())
    throw std::invalid_argument("SourceConfig: exactly one of alpha/target_overlap must be set");
  if (src.alpha && !(*src.alpha > 0.0))
    throw std::invalid_argument("SourceConfig: alpha must be > 0");
  if (src.target_overlap && !(*src.target_overlap > 0.0 && *src.target_overlap < 1.0))
    throw std::invalid_argument("SourceConfig: target_overlap must lie in (0,1)");
  if (src.pulse_count < 1) throw std::invalid_argument("SourceConfig: pulse_count must be >= 1");
  if (src.vacuum_slots_per_signal < 0)
    throw std::invalid_argument("SourceConfig: vacuum_slots_per_signal must be >= 0");
}

inline void validate_channel_config(const ChannelConfig& ch) {
  if (!(ch.transmission > 0.0 && ch.transmission <= 1.0))
    throw std::invalid_argument("ChannelConfig: transmission must lie in (0,1]");
  if (ch.excess_noise < 0.0) throw std::invalid_argument("ChannelConfig: excess_noise must be >= 0");
  if (ch.excess_noise_x && *ch.excess_noise_x < 0.0)
    throw std::invalid_argument("ChannelConfig: excess_noise_x must be >= 0");
  if (ch.excess_noise_y && *ch.excess_noise_y < 0.0)
    throw std::invalid_argument("ChannelConfig: excess_noise_y must be >= 0");
}

// alpha = sqrt(-ln(o)/2), so that <+alpha|-alpha> = exp(-2 alpha^2) = o.
inline double amplitude_for_overlap(double o) {
  if (!(o > 0.0 && o < 1.0)) throw std::invalid_argument("amplitude_for_overlap: overlap must lie in (0,1)");
  return std::sqrt(-std::log(o) / 2.0);
}

inline double resolved_alpha(const SourceConfig& src) {
  validate_source_config(src);
  return src.alpha ? *src.alpha : amplitude_for_overlap(*src.target_overlap);
}

// Mean amplitude after loss plus per-axis heterodyne outcome variance in SNU.
inline std::pair<double, double> apply_channel(double alpha_in, const ChannelConfig& ch) {
  validate_channel_config(ch);
  return {std::sqrt(ch.transmission) * alpha_in, 1.0 + ch.excess_noise};
}

inline double eve_tap_amplitude(double alpha, double transmission) {
  if (!(transmission > 0.0 && transmission <= 1.0))
    throw std::invalid_argument("eve_tap_amplitude: transmission must lie in (0,1]");
  return std::sqrt(1.0 - transmission) * alpha;
}

// Strong-local-oscillator linearization of the Stokes measurement:
// S2 -> X and S3 -> Y of the signal mode, x = s2 / (2 sqrt(n_LO)).
inline std::pair<double, double> stokes_to_quadrature(double s2, double s3, double lo_power_photons) {
  if (!(lo_power_photons > 0.0))
    throw std::invalid_argument("stokes_to_quadrature: lo_power_photons must be > 0");
  const double d = 2.0 * std::sqrt(lo_power_photons);
  return {s2 / d, s3 / d};
}

namespace detail {

// Pulses per RNG chunk. Fixed so that worker decomposition never affects the
// output: chunk c always consumes exactly the stream (seed, "sampler", c).
inline constexpr std::int64_t kSamplerChunkPulses = 4096;

inline void sample_chunk(const SourceConfig& src, const ChannelConfig& ch, std::int64_t chunk,
                         std::vector<TrialRecord>& out) {
  const double alpha = src.alpha ? *src.alpha : amplitude_for_overlap(*src.target_overlap);
  const double mean_mag = std::sqrt(ch.transmission) * alpha * kSnuScale;
  const double sd_x = std::sqrt(1.0 + (ch.excess_noise_x ? *ch.excess_noise_x : ch.excess_noise));
  const double sd_y = std::sqrt(1.0 + (ch.excess_noise_y ? *ch.excess_noise_y : ch.excess_noise));
  const std::int64_t group = 1 + src.vacuum_slots_per_signal;

  const std::int64_t first = chunk * kSamplerChunkPulses;
  const std::int64_t last = std::min(first + kSamplerChunkPulses, src.pulse_count);

  Xoshiro256pp rng = make_named_stream(src.seed, "sampler", static_cast<std::uint64_t>(chunk));
  for (std::int64_t s = first; s < last; ++s) {
    const int bit = static_cast<int>(uniform_bit(rng));
    const auto [gx, gy] = gaussian_pair(rng);

    const size_t base = static_cast<size_t>((s - first) * group);
    TrialRecord& sig = out[base];
    sig.index = s * group;
    sig.kind = TrialKind::Signal;
    sig.bit = bit;
    sig.sent_amplitude = (bit == 1 ? alpha : -alpha);
    sig.outcome_x = (bit == 1 ? mean_mag : -mean_mag) + sd_x * gx;
    sig.outcome_y = sd_y * gy;

    for (int v = 0; v < src.vacuum_slots_per_signal; ++v) {
      const auto [vx, vy] = gaussian_pair(rng);
      TrialRecord& rec = out[base + 1 + static_cast<size_t>(v)];
      rec.index = s * group + 1 + v;
      rec.kind = TrialKind::VacuumCalibration;
      rec.bit = -1;
      rec.sent_amplitude = 0.0;
      rec.outcome_x = vx;
      rec.outcome_y = vy;
    }
  }
}

}  // namespace detail

// Full measurement sequence: for each signal pulse an interleaved block of
// vacuum calibration slots follows, mirroring the acquisition layout. The
// record list is bit-identical for any worker count because randomness is
// drawn per fixed-size chunk, never per thread.
inline std::vector<TrialRecord> sample_heterodyne_batch(const SourceConfig& src, const ChannelConfig& ch,
                                                        int workers = 1) {
  validate_source_config(src);
  validate_channel_config(ch);
  if (workers < 1) throw std::invalid_argument("sample_heterodyne_batch: workers must be >= 1");

  const std::int64_t group = 1 + src.vacuum_slots_per_signal;
  const std::int64_t nchunks =
      (src.pulse_count + detail::kSamplerChunkPulses - 1) / detail::kSamplerChunkPulses;
  std::vector<TrialRecord> records(static_cast<size_t>(src.pulse_count * group));

  auto run_range = [&](std::int64_t c0, std::int64_t stride) {
    for (std::int64_t c = c0; c < nchunks; c += stride) {
      const std::int64_t first = c * detail::kSamplerChunkPulses;
      const std::int64_t last = std::min(first + detail::kSamplerChunkPulses, src.pulse_count);
      std::vector<TrialRecord> chunk_out(static_cast<size_t>((last - first) * group));
      detail::sample_chunk(src, ch, c, chunk_out);
      std::copy(chunk_out.begin(), chunk_out.end(), records.begin() + static_cast<size_t>(first * group));
    }
  };

  if (workers == 1 || nchunks <= 1) {
    run_range(0, 1);
  } else {
    std::vector<std::thread> pool;
    const int n = static_cast<int>(std::min<std::int64_t>(workers, nchunks));
    pool.reserve(static_cast<size_t>(n));
    for (int w = 0; w < n; ++w) pool.emplace_back(run_range, w, n);
    for (auto& t : pool) t.join();
  }
  return records;
}

}
