#pragma once

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/config.hpp"
#include "cvqkd/csv.hpp"
#include "cvqkd/estimation.hpp"
#include "cvqkd/histogram.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/manifest.hpp"
#include "cvqkd/reference_data.hpp"
#include "cvqkd/svg.hpp"
#include "cvqkd/witness.hpp"

// Command implementations behind the executable. They live in the library so
// the test suite can drive the exact code paths the binary runs, in process.
namespace cvqkd::cli {

// The completion search ended without a usable certificate; maps to the
// CLI's exit code 3.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Deterministic grid evaluation: work items are claimed by index and results
// land in index-addressed slots, so the merge order never depends on thread
// scheduling.
template <typename F>
inline void parallel_for_index(int n, int workers, F&& f) {
  if (workers > n) workers = n;
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

inline OutputDigest write_output(const std::filesystem::path& dir, const std::string& name,
                                 const std::string& content) {
  const auto path = dir / name;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << content;
  f.flush();
  if (!f) throw IoError("write failed for '" + path.string() + "'");
  return {name, sha256_hex(content)};
}

inline double resolved_overlap(const SourceConfig& src) {
  if (src.target_overlap) return *src.target_overlap;
  return std::exp(-2.0 * *src.alpha * *src.alpha);
}

inline RunManifest start_manifest(const std::string& command, const RunConfig& cfg) {
  RunManifest m;
  m.command = command;
  m.seed = cfg.source.seed;
  m.started_at = iso8601_utc_now();
  std::ostringstream echo;
  write_run_config(echo, cfg);
  m.config_echo = echo.str();
  return m;
}

inline void finish_manifest(RunManifest& m, const std::filesystem::path& dir) {
  m.finished_at = iso8601_utc_now();
  std::ostringstream ss;
  write_manifest(ss, m);
  write_output(dir, "manifest.txt", ss.str());
}

// Witness at analytic moments with independent per-axis excess variances;
// the symmetric case reduces to witness_at_excess.
inline WitnessVerdict witness_at_excess_xy(double transmission, double alpha, double e_x,
                                           double e_y, const WitnessOptions& opts) {
  MomentSet m1;
  m1.convention = UnitConvention::Natural;
  m1.n_samples = 0;
  m1.mean_x = std::sqrt(transmission) * alpha;
  m1.mean_y = 0.0;
  m1.var_x = (2.0 + e_x) / 4.0;
  m1.var_y = (2.0 + e_y) / 4.0;
  m1.cov_xy = 0.0;
  MomentSet m0 = m1;
  m0.mean_x = -m1.mean_x;
  return witness_from_moments(m0, m1, alpha, transmission, opts);
}

inline void require_converged(const WitnessVerdict& v, const std::string& what) {
  if (v.status == SolverStatus::NumericalFailure)
    throw SolverError(what + ": completion search did not converge");
}

inline std::string fmt(double v) { return cvqkd::detail::format_double(v); }

}  // namespace detail

// ---------------------------------------------------------------------------
// simulate: one record batch plus its manifest.

inline void cmd_simulate(const RunConfig& cfg, const std::string& out_dir, int workers,
                         std::ostream& log) {
  validate_run_config(cfg);
  const std::filesystem::path dir{out_dir};
  detail::ensure_dir(dir);
  auto manifest = detail::start_manifest("simulate", cfg);

  const auto records = sample_heterodyne_batch(cfg.source, cfg.channel, workers);

  RecordsHeader header;
  header.seed = cfg.source.seed;
  header.alpha = resolved_alpha(cfg.source);
  header.transmission = cfg.channel.transmission;
  header.xi = cfg.channel.excess_noise;
  std::ostringstream csv;
  write_records_csv(csv, header, records);
  manifest.outputs.push_back(detail::write_output(dir, "records.csv", csv.str()));

  detail::finish_manifest(manifest, dir);
  log << "simulate: wrote " << records.size() << " records -> " << (dir / "records.csv").string()
      << "\n";
}

// ---------------------------------------------------------------------------
// analyze: estimation chain over an existing records file.

inline void cmd_analyze(const std::string& records_path, const RunConfig& cfg,
                        const std::string& out_dir, const std::string& format,
                        std::ostream& log) {
  const std::filesystem::path dir{out_dir};
  detail::ensure_dir(dir);

  std::ifstream in(records_path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + records_path + "'");
  RecordsFile file;
  try {
    file = read_records_csv(in);
  } catch (const CsvError& e) {
    throw IoError(records_path + ": " + e.what());
  }

  auto manifest = detail::start_manifest("analyze", cfg);
  manifest.seed = file.header.seed;

  std::int64_t n_signal = 0, n_bit0 = 0, n_bit1 = 0, n_vacuum = 0;
  for (const auto& r : file.records) {
    if (r.kind == TrialKind::Signal) {
      ++n_signal;
      (r.bit == 0 ? n_bit0 : n_bit1) += 1;
    } else {
      ++n_vacuum;
    }
  }
  log << "analyze: " << n_signal << " signal / " << n_vacuum << " vacuum records from '"
      << records_path << "'\n";

  // Q-function surface and marginals of the signal ensemble when present,
  // otherwise of the calibration slots.
  std::vector<TrialRecord> ensemble;
  for (const auto& r : file.records)
    if ((n_signal > 0) == (r.kind == TrialKind::Signal)) ensemble.push_back(r);
  {
    std::ostringstream ss;
    write_q_surface_csv(ss, build_q_histogram(ensemble, 0.1));
    manifest.outputs.push_back(detail::write_output(dir, "q_surface.csv", ss.str()));
  }
  const Histogram1D marg_x = marginal_histogram(ensemble, Axis::X);
  const Histogram1D marg_y = marginal_histogram(ensemble, Axis::Y);
  {
    std::ostringstream ss;
    write_marginal_csv(ss, marg_x, "x");
    manifest.outputs.push_back(detail::write_output(dir, "marginal_x.csv", ss.str()));
  }
  {
    std::ostringstream ss;
    write_marginal_csv(ss, marg_y, "y");
    manifest.outputs.push_back(detail::write_output(dir, "marginal_y.csv", ss.str()));
  }
  if (format == "svg") {
    std::vector<SvgSeries> series(2);
    series[0].label = "x marginal";
    series[1].label = "y marginal";
    for (std::size_t i = 0; i < marg_x.density.size(); ++i)
      series[0].points.push_back(
          {0.5 * (marg_x.edges[i] + marg_x.edges[i + 1]), marg_x.density[i]});
    for (std::size_t i = 0; i < marg_y.density.size(); ++i)
      series[1].points.push_back(
          {0.5 * (marg_y.edges[i] + marg_y.edges[i + 1]), marg_y.density[i]});
    manifest.outputs.push_back(detail::write_output(
        dir, "marginals.svg",
        svg_line_plot("heterodyne marginals", "quadrature (SNU)", "density", series)));
  }

  // excess noise and witness need both conditional states plus calibration
  const bool estimable = n_bit0 >= 2 && n_bit1 >= 2 && n_vacuum >= 2;
  if (!estimable) {
    log << "excess noise: skipped (need signal records of both bits and vacuum slots)\n";
    log << "witness: skipped (need signal records of both bits and vacuum slots)\n";
  } else {
    std::vector<ExcessNoiseReport> reports;
    reports.push_back(excess_noise_report(file.records));
    if (cfg.detector.electronic_noise_rel > 0.0)
      reports.push_back(excess_noise_report(
          file.records, cfg.detector.electronic_noise_rel * reports.front().vacuum_var_used));
    std::ostringstream ss;
    write_excess_csv(ss, reports);
    manifest.outputs.push_back(detail::write_output(dir, "excess_report.csv", ss.str()));
    log << "excess noise: e_x = " << detail::fmt(reports.front().e_x)
        << ", e_y = " << detail::fmt(reports.front().e_y) << " (+- "
        << detail::fmt(reports.front().stat_error_x) << ")\n";

    SourceConfig src;
    src.alpha = file.header.alpha;
    src.pulse_count = n_signal;
    src.seed = file.header.seed;
    const WitnessVerdict verdict = witness_from_data(file.records, src,
                                                     file.header.transmission,
                                                     cfg.witness_tolerance);
    detail::require_converged(verdict, "witness");
    WitnessCsvRow row;
    row.overlap = std::exp(-2.0 * file.header.alpha * file.header.alpha);
    row.transmission = file.header.transmission;
    row.e_x = reports.front().e_x;
    row.e_y = reports.front().e_y;
    row.corrected = false;
    row.verdict = verdict;
    std::ostringstream ws;
    write_witness_csv(ws, {row});
    manifest.outputs.push_back(detail::write_output(dir, "witness.csv", ws.str()));
    log << "witness: " << (verdict.entangled ? "entangled" : "inconclusive")
        << " (t_star = " << detail::fmt(verdict.t_star) << ")\n";
  }

  detail::finish_manifest(manifest, dir);
}

// ---------------------------------------------------------------------------
// witness: verdict at the configured operating point, no sampling.

inline void cmd_witness(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  validate_run_config(cfg);
  const std::filesystem::path dir{out_dir};
  detail::ensure_dir(dir);
  auto manifest = detail::start_manifest("witness", cfg);

  const double alpha = resolved_alpha(cfg.source);
  const double e_x = cfg.channel.excess_noise_x.value_or(cfg.channel.excess_noise);
  const double e_y = cfg.channel.excess_noise_y.value_or(cfg.channel.excess_noise);
  WitnessOptions opts;
  opts.tolerance = cfg.witness_tolerance;
  const WitnessVerdict verdict =
      detail::witness_at_excess_xy(cfg.channel.transmission, alpha, e_x, e_y, opts);
  detail::require_converged(verdict, "witness");

  WitnessCsvRow row;
  row.overlap = detail::resolved_overlap(cfg.source);
  row.transmission = cfg.channel.transmission;
  row.e_x = e_x;
  row.e_y = e_y;
  row.verdict = verdict;
  std::ostringstream ss;
  write_witness_csv(ss, {row});
  manifest.outputs.push_back(detail::write_output(dir, "witness.csv", ss.str()));

  detail::finish_manifest(manifest, dir);
  log << "witness: " << (verdict.entangled ? "entangled" : "inconclusive")
      << " (t_star = " << detail::fmt(verdict.t_star)
      << ", gap = " << detail::fmt(verdict.certified_gap) << ")\n";
}

// ---------------------------------------------------------------------------
// bounds: tolerable-excess-variance curve at the configured transmission.

inline void cmd_bounds(const RunConfig& cfg, const std::string& out_dir, int workers,
                       const std::string& format, std::ostream& log) {
  validate_run_config(cfg);
  const std::filesystem::path dir{out_dir};
  detail::ensure_dir(dir);
  auto manifest = detail::start_manifest("bounds", cfg);

  const double t = cfg.channel.transmission;
  std::vector<double> overlaps;
  for (int i = 0; i <= 10; ++i) overlaps.push_back((9 + i) / 20.0);

  std::vector<BoundCurve> curves(overlaps.size());
  detail::parallel_for_index(static_cast<int>(overlaps.size()), workers,
                             [&](int i) { curves[i] = entanglement_bound(t, overlaps[i]); });

  std::ostringstream ss;
  write_bound_csv(ss, curves);
  manifest.outputs.push_back(detail::write_output(dir, "bounds.csv", ss.str()));

  if (format == "svg") {
    SvgSeries s;
    s.label = "T = " + detail::fmt(t);
    for (const auto& c : curves) s.points.push_back({c.overlap, c.e_max});
    manifest.outputs.push_back(detail::write_output(
        dir, "bounds.svg",
        svg_line_plot("tolerable excess variance", "source overlap", "E_max (SNU)", {s})));
  }

  detail::finish_manifest(manifest, dir);
  log << "bounds: " << curves.size() << " points at T = " << detail::fmt(t) << ", E_max("
      << detail::fmt(overlaps.front()) << ") = " << detail::fmt(curves.front().e_max) << "\n";
}

// ---------------------------------------------------------------------------
// keyrate: postselection rates at the configured operating point.

inline void cmd_keyrate(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  validate_run_config(cfg);
  const std::filesystem::path dir{out_dir};
  detail::ensure_dir(dir);
  auto manifest = detail::start_manifest("keyrate", cfg);

  const double alpha = resolved_alpha(cfg.source);
  const KeyRateReport report = secret_key_rate(alpha, cfg.channel.transmission, cfg.postselection,
                                               cfg.ec, cfg.direction);
  {
    std::ostringstream ss;
    write_keyrate_csv(ss, {report});
    manifest.outputs.push_back(detail::write_output(dir, "keyrate.csv", ss.str()));
  }
  {
    std::ostringstream ss;
    write_slices_csv(ss, report.slices);
    manifest.outputs.push_back(detail::write_output(dir, "slices.csv", ss.str()));
  }
  manifest.outputs.push_back(
      detail::write_output(dir, "keyrate_table.txt", format_keyrate_table({report})));

  detail::finish_manifest(manifest, dir);
  log << "keyrate: tau_opt = " << detail::fmt(report.tau_opt)
      << ", G_DR = " << detail::fmt(report.g_dr) << ", G_RR = " << detail::fmt(report.g_rr)
      << " (" << to_string(report.direction) << " optimized)\n";
}

// ---------------------------------------------------------------------------
// reproduce: acceptance-scale experiments against the bundled reference
// dataset. Every comparison column is suffixed with its provenance.

namespace detail {

inline void reproduce_table1(const std::filesystem::path& dir, int workers, RunManifest& manifest,
                             std::ostream& log) {
  const auto& table = reference::kVarianceTable;
  struct Pair {
    WitnessVerdict raw, corrected;
  };
  std::vector<Pair> verdicts(table.size());
  parallel_for_index(static_cast<int>(table.size()), workers, [&](int i) {
    const auto& row = table[static_cast<std::size_t>(i)];
    const double alpha = amplitude_for_overlap(row.overlap);
    WitnessOptions opts;
    verdicts[static_cast<std::size_t>(i)].raw =
        witness_at_excess_xy(row.transmission, alpha, row.e_x, row.e_y, opts);
    verdicts[static_cast<std::size_t>(i)].corrected = witness_at_excess(
        row.transmission, row.overlap, row.e_x_corrected, opts);
  });

  std::vector<std::vector<std::string>> rows;
  int entangled = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table[i];
    const auto& v = verdicts[i];
    require_converged(v.raw, "table1");
    require_converged(v.corrected, "table1");
    entangled += (v.raw.entangled && v.corrected.entangled) ? 1 : 0;
    rows.push_back({fmt(row.overlap), fmt(row.transmission), fmt(row.e_x), fmt(row.e_y),
                    fmt(row.e_x_corrected), v.raw.entangled ? "entangled" : "inconclusive",
                    fmt(v.raw.t_star), v.corrected.entangled ? "entangled" : "inconclusive",
                    fmt(v.corrected.t_star)});
  }
  std::ostringstream ss;
  write_table_csv(ss,
                  {"overlap", "transmission", "e_x_reference", "e_y_reference",
                   "e_x_corrected_reference", "verdict_raw_computed", "t_star_raw_computed",
                   "verdict_corrected_computed", "t_star_corrected_computed"},
                  rows);
  manifest.outputs.push_back(write_output(dir, "table1.csv", ss.str()));
  log << "reproduce table1: " << entangled << "/" << table.size()
      << " operating points entangled under both corrections\n";
}

inline void reproduce_table2(const std::filesystem::path& dir, int workers, RunManifest& manifest,
                             std::ostream& log) {
  const auto& table = reference::kKeyRateTable;
  std::vector<KeyRateReport> reports(table.size());
  parallel_for_index(static_cast<int>(table.size()), workers, [&](int i) {
    const auto& row = table[static_cast<std::size_t>(i)];
    reports[static_cast<std::size_t>(i)] =
        secret_key_rate(amplitude_for_overlap(row.overlap), row.transmission,
                        PostselectionConfig{}, kCascadeLikeEc);
  });

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table[i];
    const auto& r = reports[i];
    rows.push_back({fmt(row.overlap), fmt(row.transmission), fmt(row.g_dr), fmt(row.g_rr),
                    fmt(r.tau_opt), fmt(r.g_dr), fmt(r.g_rr)});
  }
  std::ostringstream ss;
  write_table_csv(ss,
                  {"overlap", "transmission", "g_dr_reference", "g_rr_reference",
                   "tau_opt_computed", "g_dr_computed", "g_rr_computed"},
                  rows);
  manifest.outputs.push_back(write_output(dir, "table2.csv", ss.str()));
  log << "reproduce table2: " << table.size() << " operating points, cascade-like EC preset\n";
}

inline void reproduce_fig2(const std::filesystem::path& dir, int workers,
                           const std::string& format, RunManifest& manifest, std::ostream& log) {
  std::vector<double> overlaps;
  for (int i = 0; i <= 20; ++i) overlaps.push_back((18 + i) / 40.0);
  const auto& ts = reference::kBoundCurveTransmissions;

  const int n = static_cast<int>(ts.size() * overlaps.size());
  std::vector<BoundCurve> curves(static_cast<std::size_t>(n));
  parallel_for_index(n, workers, [&](int i) {
    const std::size_t ti = static_cast<std::size_t>(i) / overlaps.size();
    const std::size_t oi = static_cast<std::size_t>(i) % overlaps.size();
    curves[static_cast<std::size_t>(i)] = entanglement_bound(ts[ti], overlaps[oi]);
  });

  std::vector<std::vector<std::string>> rows;
  for (const auto& c : curves)
    rows.push_back(
        {"bound", fmt(c.transmission), fmt(c.overlap), fmt(c.e_max), "computed"});
  for (const auto& m : reference::kVarianceTable)
    rows.push_back({"measured", fmt(m.transmission), fmt(m.overlap), fmt(m.e_x_corrected),
                    "reference"});
  std::ostringstream ss;
  write_table_csv(ss, {"series", "transmission", "overlap", "excess_variance", "provenance"},
                  rows);
  manifest.outputs.push_back(write_output(dir, "fig2.csv", ss.str()));

  if (format == "svg") {
    std::vector<SvgSeries> series;
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
      SvgSeries s;
      s.label = "bound T = " + fmt(ts[ti]);
      for (std::size_t oi = 0; oi < overlaps.size(); ++oi)
        s.points.push_back({overlaps[oi], curves[ti * overlaps.size() + oi].e_max});
      series.push_back(std::move(s));
    }
    SvgSeries meas;
    meas.label = "measured (corrected)";
    meas.points_only = true;
    for (const auto& m : reference::kVarianceTable)
      meas.points.push_back({m.overlap, m.e_x_corrected});
    series.push_back(std::move(meas));
    manifest.outputs.push_back(write_output(
        dir, "fig2.svg",
        svg_line_plot("tolerable excess variance", "source overlap", "E_max (SNU)", series)));
  }
  log << "reproduce fig2: " << ts.size() << " bound curves, " << overlaps.size()
      << " overlaps each\n";
}

inline void reproduce_fig9(const std::filesystem::path& dir, int workers,
                           const std::string& format, RunManifest& manifest, std::ostream& log) {
  const double overlap = 0.65, t = 0.483;
  const double alpha = amplitude_for_overlap(overlap);
  const double mu = signal_mean_snu(alpha, t);

  SourceConfig src;
  src.target_overlap = overlap;
  src.pulse_count = 250000;
  src.vacuum_slots_per_signal = 0;
  src.seed = 93001;
  ChannelConfig ch;
  ch.transmission = t;
  const auto records = sample_heterodyne_batch(src, ch, workers);

  std::vector<std::vector<std::string>> rows;
  std::vector<SvgSeries> series(2);
  series[0].label = "acceptance (model)";
  series[1].label = "avg error (model)";
  for (int i = 0; i <= 40; ++i) {
    const double tau = i / 20.0;
    const auto model = acceptance_and_error(tau, mu, 1.0);
    const auto emp = empirical_postselect(records, tau);
    std::string acc_ref, err_ref;
    if (i % 10 == 0) {
      const auto& ref = reference::kAcceptanceCurve[static_cast<std::size_t>(i) / 10];
      acc_ref = fmt(ref.acceptance);
      err_ref = fmt(ref.avg_error);
    }
    rows.push_back({fmt(tau), fmt(model.fraction), fmt(model.avg_error),
                    fmt(emp.accepted_fraction), fmt(emp.error_rate), acc_ref, err_ref});
    series[0].points.push_back({tau, model.fraction});
    series[1].points.push_back({tau, model.avg_error});
  }
  std::ostringstream ss;
  write_table_csv(ss,
                  {"tau", "acceptance_computed", "avg_error_computed", "acceptance_empirical",
                   "avg_error_empirical", "acceptance_reference", "avg_error_reference"},
                  rows);
  manifest.outputs.push_back(write_output(dir, "fig9.csv", ss.str()));

  if (format == "svg") {
    SvgSeries ref_acc, ref_err;
    ref_acc.label = "acceptance (reference)";
    ref_acc.points_only = true;
    ref_err.label = "avg error (reference)";
    ref_err.points_only = true;
    for (const auto& r : reference::kAcceptanceCurve) {
      ref_acc.points.push_back({r.tau, r.acceptance});
      ref_err.points.push_back({r.tau, r.avg_error});
    }
    manifest.outputs.push_back(write_output(
        dir, "fig9.svg",
        svg_line_plot("postselection acceptance and error", "threshold tau (SNU)", "fraction",
                      {series[0], series[1], ref_acc, ref_err})));
  }
  log << "reproduce fig9: 41 thresholds, empirical batch of " << src.pulse_count << " pulses\n";
}

}  // namespace detail

inline void cmd_reproduce(const std::string& target, const std::string& out_dir, int workers,
                          const std::string& format, std::ostream& log) {
  const std::filesystem::path dir{out_dir};
  detail::ensure_dir(dir);
  auto manifest = detail::start_manifest("reproduce " + target, default_run_config());

  if (target == "table1") {
    detail::reproduce_table1(dir, workers, manifest, log);
  } else if (target == "table2") {
    detail::reproduce_table2(dir, workers, manifest, log);
  } else if (target == "fig2") {
    detail::reproduce_fig2(dir, workers, format, manifest, log);
  } else if (target == "fig9") {
    detail::reproduce_fig9(dir, workers, format, manifest, log);
  } else {
    throw ConfigError("unknown reproduction target '" + target +
                      "' (expected table1, table2, fig2 or fig9)");
  }

  detail::finish_manifest(manifest, dir);
}

}  // namespace cvqkd::cli
