#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/estimation.hpp"
#include "cvqkd/histogram.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/witness.hpp"

namespace cvqkd {

// Parse failure with the 1-based line number it happened on; the message
// already names the line, the caller only has to prepend the file name.
struct CsvError : std::runtime_error {
  int line;
  CsvError(int line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

namespace detail {

// Shortest round-trip decimal form. Every float in every CSV goes through
// here, which is what makes re-runs byte-identical.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_csv_double(std::string_view field, int line_no) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw CsvError(line_no, "bad number '" + std::string(field) + "'");
  return v;
}

inline std::int64_t parse_csv_int(std::string_view field, int line_no) {
  std::int64_t v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw CsvError(line_no, "bad integer '" + std::string(field) + "'");
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace detail

// Batch provenance carried in the records file itself, so an analysis run
// does not need the generating configuration.
struct RecordsHeader {
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double transmission = 1.0;
  double xi = 0.0;
};

struct RecordsFile {
  RecordsHeader header;
  std::vector<TrialRecord> records;
};

inline void write_records_csv(std::ostream& os, const RecordsHeader& h,
                              const std::vector<TrialRecord>& records) {
  using detail::format_double;
  os << "# seed=" << h.seed << " alpha=" << format_double(h.alpha) << " T="
     << format_double(h.transmission) << " xi=" << format_double(h.xi) << "\n";
  os << "index,kind,bit,outcome_x,outcome_y\n";
  for (const auto& r : records) {
    os << r.index << ',' << (r.kind == TrialKind::Signal ? "signal" : "vacuum") << ',' << r.bit
       << ',' << format_double(r.outcome_x) << ',' << format_double(r.outcome_y) << "\n";
  }
}

inline RecordsFile read_records_csv(std::istream& is) {
  RecordsFile out;
  std::string raw;
  int line_no = 0;

  // metadata comment
  if (!std::getline(is, raw)) throw CsvError(1, "empty file");
  ++line_no;
  std::string_view line = detail::strip_cr(raw);
  if (line.empty() || line[0] != '#') throw CsvError(line_no, "missing metadata header");
  bool have_seed = false, have_alpha = false, have_t = false, have_xi = false;
  std::size_t pos = 1;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    const std::size_t eq = line.find('=', pos);
    if (eq == std::string_view::npos) break;
    const std::size_t end = line.find(' ', eq + 1);
    const std::string_view key = line.substr(pos, eq - pos);
    const std::string_view val =
        line.substr(eq + 1, (end == std::string_view::npos ? line.size() : end) - eq - 1);
    if (key == "seed") {
      out.header.seed = static_cast<std::uint64_t>(detail::parse_csv_int(val, line_no));
      have_seed = true;
    } else if (key == "alpha") {
      out.header.alpha = detail::parse_csv_double(val, line_no);
      have_alpha = true;
    } else if (key == "T") {
      out.header.transmission = detail::parse_csv_double(val, line_no);
      have_t = true;
    } else if (key == "xi") {
      out.header.xi = detail::parse_csv_double(val, line_no);
      have_xi = true;
    } else {
      throw CsvError(line_no, "unknown metadata key '" + std::string(key) + "'");
    }
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  if (!(have_seed && have_alpha && have_t && have_xi))
    throw CsvError(line_no, "metadata must carry seed, alpha, T and xi");

  if (!std::getline(is, raw)) throw CsvError(line_no + 1, "missing column header");
  ++line_no;
  if (detail::strip_cr(raw) != "index,kind,bit,outcome_x,outcome_y")
    throw CsvError(line_no, "unexpected column header");

  while (std::getline(is, raw)) {
    ++line_no;
    line = detail::strip_cr(raw);
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != 5) throw CsvError(line_no, "expected 5 fields");
    TrialRecord r;
    r.index = detail::parse_csv_int(fields[0], line_no);
    if (fields[1] == "signal") {
      r.kind = TrialKind::Signal;
    } else if (fields[1] == "vacuum") {
      r.kind = TrialKind::VacuumCalibration;
    } else {
      throw CsvError(line_no, "unknown record kind '" + std::string(fields[1]) + "'");
    }
    r.bit = static_cast<int>(detail::parse_csv_int(fields[2], line_no));
    if (r.kind == TrialKind::Signal && r.bit != 0 && r.bit != 1)
      throw CsvError(line_no, "signal bit must be 0 or 1");
    if (r.kind == TrialKind::VacuumCalibration && r.bit != -1)
      throw CsvError(line_no, "calibration bit must be -1");
    r.outcome_x = detail::parse_csv_double(fields[3], line_no);
    r.outcome_y = detail::parse_csv_double(fields[4], line_no);
    // the amplitude column is not serialized; it is implied by the header
    r.sent_amplitude =
        r.kind == TrialKind::Signal ? (r.bit == 1 ? out.header.alpha : -out.header.alpha) : 0.0;
    out.records.push_back(r);
  }
  return out;
}

// Gridded Q-function surface at cell centers, one row per cell.
inline void write_q_surface_csv(std::ostream& os, const Histogram2D& h) {
  using detail::format_double;
  os << "x,y,density\n";
  for (std::size_t i = 0; i + 1 < h.x_edges.size(); ++i) {
    const double x = 0.5 * (h.x_edges[i] + h.x_edges[i + 1]);
    for (std::size_t j = 0; j + 1 < h.y_edges.size(); ++j) {
      const double y = 0.5 * (h.y_edges[j] + h.y_edges[j + 1]);
      os << format_double(x) << ',' << format_double(y) << ',' << format_double(h.density[i][j])
         << "\n";
    }
  }
}

inline void write_marginal_csv(std::ostream& os, const Histogram1D& h, std::string_view axis_name) {
  using detail::format_double;
  os << "# axis=" << axis_name << "\n";
  os << "center,density\n";
  for (std::size_t i = 0; i < h.density.size(); ++i) {
    os << format_double(0.5 * (h.edges[i] + h.edges[i + 1])) << ',' << format_double(h.density[i])
       << "\n";
  }
}

inline void write_bound_csv(std::ostream& os, const std::vector<BoundCurve>& curves) {
  using detail::format_double;
  os << "transmission,overlap,e_max\n";
  for (const auto& c : curves) {
    os << format_double(c.transmission) << ',' << format_double(c.overlap) << ','
       << format_double(c.e_max) << "\n";
  }
}

// One witness evaluation with the inputs it was run on.
struct WitnessCsvRow {
  double overlap = 0.0;
  double transmission = 1.0;
  double e_x = 0.0;
  double e_y = 0.0;
  bool corrected = false;
  WitnessVerdict verdict;
};

inline void write_witness_csv(std::ostream& os, const std::vector<WitnessCsvRow>& rows) {
  using detail::format_double;
  os << "overlap,transmission,e_x,e_y,corrected,t_star,certified_gap,verdict,solver_status,"
        "iterations\n";
  for (const auto& r : rows) {
    os << format_double(r.overlap) << ',' << format_double(r.transmission) << ','
       << format_double(r.e_x) << ',' << format_double(r.e_y) << ','
       << (r.corrected ? "true" : "false") << ',' << format_double(r.verdict.t_star) << ','
       << format_double(r.verdict.certified_gap) << ','
       << (r.verdict.entangled ? "entangled" : "inconclusive") << ','
       << to_string(r.verdict.status) << ',' << r.verdict.solver_iterations << "\n";
  }
}

inline void write_excess_csv(std::ostream& os, const std::vector<ExcessNoiseReport>& reports) {
  using detail::format_double;
  os << "correction,e_x,e_y,stat_error_x,stat_error_y,vacuum_var_used\n";
  for (const auto& rep : reports) {
    os << (rep.corrected ? "electronic-worst-case" : "raw") << ',' << format_double(rep.e_x)
       << ',' << format_double(rep.e_y) << ',' << format_double(rep.stat_error_x) << ','
       << format_double(rep.stat_error_y) << ',' << format_double(rep.vacuum_var_used) << "\n";
  }
}

inline void write_keyrate_csv(std::ostream& os, const std::vector<KeyRateReport>& reports) {
  using detail::format_double;
  os << "overlap,transmission,excess_noise,attack,direction,ec_efficiency,tau_opt,acceptance,"
        "g_dr,g_rr\n";
  for (const auto& r : reports) {
    os << format_double(r.source_overlap) << ',' << format_double(r.transmission) << ','
       << format_double(r.excess_noise) << ',' << r.attack << ',' << to_string(r.direction) << ','
       << format_double(r.ec_efficiency) << ',' << format_double(r.tau_opt) << ','
       << format_double(r.acceptance) << ',' << format_double(r.g_dr) << ','
       << format_double(r.g_rr) << "\n";
  }
}

inline void write_slices_csv(std::ostream& os, const std::vector<BinaryChannelSlice>& slices) {
  using detail::format_double;
  os << "x_center,weight,error\n";
  for (const auto& s : slices) {
    os << format_double(s.x_center) << ',' << format_double(s.weight) << ','
       << format_double(s.error) << "\n";
  }
}

// Human-readable rate table, columns overlap / T / DR / RR.
inline std::string format_keyrate_table(const std::vector<KeyRateReport>& reports) {
  std::string out = " overlap      T    tau_opt      G_DR      G_RR\n";
  char buf[96];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%8.2f %6.3f %10.4f %9.5f %9.5f\n", r.source_overlap,
                  r.transmission, r.tau_opt, r.g_dr, r.g_rr);
    out += buf;
  }
  return out;
}

// Generic comparison table used by the reproduction targets; every cell is
// pre-rendered so callers control formatting and provenance columns.
inline void write_table_csv(std::ostream& os, const std::vector<std::string>& header,
                            const std::vector<std::vector<std::string>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
}

}  // namespace cvqkd
