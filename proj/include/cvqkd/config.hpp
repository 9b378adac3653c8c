#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include "cvqkd/channel.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/waveform.hpp"

namespace cvqkd {

// Schema violation or unreadable configuration; maps to the CLI's exit
// code 2. The message names the offending line where one exists.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything one run needs, grouped the way the sections of the config file
// are. The witness tolerance and the reconciliation direction ride along
// here because they shape reports, not physics.
struct RunConfig {
  SourceConfig source;
  ChannelConfig channel;
  DetectorConfig detector;
  PostselectionConfig postselection;
  ECModel ec;
  ReconciliationDirection direction = ReconciliationDirection::Direct;
  double witness_tolerance = 1e-7;
  std::string output_dir = "out";
};

// The smallest self-contained run: a thousand pulses of the 0.51-overlap
// source through a lossless channel.
inline RunConfig default_run_config() {
  RunConfig cfg;
  cfg.source.target_overlap = 0.51;
  cfg.source.pulse_count = 1000;
  cfg.source.vacuum_slots_per_signal = 5;
  cfg.source.seed = 42;
  return cfg;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double config_double(std::string_view v, int line_no) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("line " + std::to_string(line_no) + ": bad number '" + std::string(v) + "'");
  return out;
}

inline std::int64_t config_int(std::string_view v, int line_no) {
  std::int64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("line " + std::to_string(line_no) + ": bad integer '" + std::string(v) + "'");
  return out;
}

inline bool config_bool(std::string_view v, int line_no) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("line " + std::to_string(line_no) + ": bad boolean '" + std::string(v) + "'");
}

// shortest round-trip decimal form, same contract as the CSV emitter
inline std::string echo_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

// Strict parse: unknown sections, unknown keys and malformed values are all
// hard errors with line numbers. Comments start at '#' anywhere.
inline RunConfig parse_run_config(std::istream& is) {
  RunConfig cfg = default_run_config();
  // the defaults above pre-fill source parameters; a config that names a
  // [source] section starts from a clean slate so "amplitude" and "overlap"
  // never both survive
  bool source_seen = false;

  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string_view line{raw};
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      section = std::string(line.substr(1, line.size() - 2));
      if (section != "source" && section != "channel" && section != "detector" &&
          section != "postselection" && section != "ec" && section != "witness" &&
          section != "output")
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section +
                          "]");
      if (section == "source" && !source_seen) {
        cfg.source = SourceConfig{};
        source_seen = true;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key{detail::trim(line.substr(0, eq))};
    const std::string_view val = detail::trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                        "' appears before any section");
    if (val.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty value for '" + key + "'");

    if (section == "source") {
      if (key == "overlap")
        cfg.source.target_overlap = detail::config_double(val, line_no);
      else if (key == "amplitude")
        cfg.source.alpha = detail::config_double(val, line_no);
      else if (key == "pulse_count")
        cfg.source.pulse_count = detail::config_int(val, line_no);
      else if (key == "vacuum_slots_per_signal")
        cfg.source.vacuum_slots_per_signal = static_cast<int>(detail::config_int(val, line_no));
      else if (key == "seed")
        cfg.source.seed = static_cast<std::uint64_t>(detail::config_int(val, line_no));
      else
        throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key +
                          "' in [source]");
    } else if (section == "channel") {
      if (key == "transmission")
        cfg.channel.transmission = detail::config_double(val, line_no);
      else if (key == "excess_noise")
        cfg.channel.excess_noise = detail::config_double(val, line_no);
      else if (key == "excess_noise_x")
        cfg.channel.excess_noise_x = detail::config_double(val, line_no);
      else if (key == "excess_noise_y")
        cfg.channel.excess_noise_y = detail::config_double(val, line_no);
      else
        throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key +
                          "' in [channel]");
    } else if (section == "detector") {
      if (key == "sample_rate")
        cfg.detector.sample_rate = detail::config_double(val, line_no);
      else if (key == "pulse_duration")
        cfg.detector.pulse_duration = detail::config_double(val, line_no);
      else if (key == "samples_per_pulse")
        cfg.detector.samples_per_pulse = static_cast<int>(detail::config_int(val, line_no));
      else if (key == "electronic_noise_rel")
        cfg.detector.electronic_noise_rel = detail::config_double(val, line_no);
      else if (key == "lowpass_cutoff")
        cfg.detector.lowpass_cutoff = detail::config_double(val, line_no);
      else if (key == "quantum_efficiency")
        cfg.detector.quantum_efficiency = detail::config_double(val, line_no);
      else
        throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key +
                          "' in [detector]");
    } else if (section == "postselection") {
      if (key == "threshold")
        cfg.postselection.threshold = detail::config_double(val, line_no);
      else if (key == "slice_width")
        cfg.postselection.slice_width = detail::config_double(val, line_no);
      else if (key == "clip_negative_slices")
        cfg.postselection.clip_negative_slices = detail::config_bool(val, line_no);
      else
        throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key +
                          "' in [postselection]");
    } else if (section == "ec") {
      if (key == "efficiency_f") {
        cfg.ec.efficiency_f = detail::config_double(val, line_no);
      } else if (key == "direction") {
        if (val == "direct")
          cfg.direction = ReconciliationDirection::Direct;
        else if (val == "reverse")
          cfg.direction = ReconciliationDirection::Reverse;
        else
          throw ConfigError("line " + std::to_string(line_no) +
                            ": direction must be 'direct' or 'reverse'");
      } else {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key +
                          "' in [ec]");
      }
    } else if (section == "witness") {
      if (key == "tolerance")
        cfg.witness_tolerance = detail::config_double(val, line_no);
      else
        throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key +
                          "' in [witness]");
    } else {  // output
      if (key == "directory")
        cfg.output_dir = std::string(val);
      else
        throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key +
                          "' in [output]");
    }
  }
  return cfg;
}

// Cross-field checks, delegated to the per-module validators so the CLI and
// the library reject exactly the same states.
inline void validate_run_config(const RunConfig& cfg) {
  try {
    validate_source_config(cfg.source);
    validate_channel_config(cfg.channel);
    validate_detector_config(cfg.detector);
    validate_postselection_config(cfg.postselection);
    validate_ec_model(cfg.ec);
    if (!(cfg.witness_tolerance > 0.0))
      throw std::invalid_argument("witness tolerance must be > 0");
    if (cfg.output_dir.empty()) throw std::invalid_argument("output directory must not be empty");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// Full round-trippable echo: parse(write(cfg)) reproduces cfg. This is what
// run manifests embed.
inline void write_run_config(std::ostream& os, const RunConfig& cfg) {
  const auto num = [](double v) { return detail::echo_double(v); };
  os << "[source]\n";
  if (cfg.source.target_overlap) os << "overlap = " << num(*cfg.source.target_overlap) << "\n";
  if (cfg.source.alpha) os << "amplitude = " << num(*cfg.source.alpha) << "\n";
  os << "pulse_count = " << cfg.source.pulse_count << "\n";
  os << "vacuum_slots_per_signal = " << cfg.source.vacuum_slots_per_signal << "\n";
  os << "seed = " << cfg.source.seed << "\n";
  os << "\n[channel]\n";
  os << "transmission = " << num(cfg.channel.transmission) << "\n";
  os << "excess_noise = " << num(cfg.channel.excess_noise) << "\n";
  if (cfg.channel.excess_noise_x) os << "excess_noise_x = " << num(*cfg.channel.excess_noise_x) << "\n";
  if (cfg.channel.excess_noise_y) os << "excess_noise_y = " << num(*cfg.channel.excess_noise_y) << "\n";
  os << "\n[detector]\n";
  os << "sample_rate = " << num(cfg.detector.sample_rate) << "\n";
  os << "pulse_duration = " << num(cfg.detector.pulse_duration) << "\n";
  os << "samples_per_pulse = " << cfg.detector.samples_per_pulse << "\n";
  os << "electronic_noise_rel = " << num(cfg.detector.electronic_noise_rel) << "\n";
  os << "lowpass_cutoff = " << num(cfg.detector.lowpass_cutoff) << "\n";
  os << "quantum_efficiency = " << num(cfg.detector.quantum_efficiency) << "\n";
  os << "\n[postselection]\n";
  os << "threshold = " << num(cfg.postselection.threshold) << "\n";
  os << "slice_width = " << num(cfg.postselection.slice_width) << "\n";
  os << "clip_negative_slices = " << (cfg.postselection.clip_negative_slices ? "true" : "false")
     << "\n";
  os << "\n[ec]\n";
  os << "efficiency_f = " << num(cfg.ec.efficiency_f) << "\n";
  os << "direction = "
     << (cfg.direction == ReconciliationDirection::Direct ? "direct" : "reverse") << "\n";
  os << "\n[witness]\n";
  os << "tolerance = " << num(cfg.witness_tolerance) << "\n";
  os << "\n[output]\n";
  os << "directory = " << cfg.output_dir << "\n";
}

}  // namespace cvqkd
