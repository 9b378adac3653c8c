#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cvqkd/config.hpp"
#include "cvqkd/csv.hpp"
#include "cvqkd/manifest.hpp"
#include "cvqkd/svg.hpp"

using namespace cvqkd;

namespace {

std::string render_records(const RecordsHeader& h, const std::vector<TrialRecord>& recs) {
  std::ostringstream os;
  write_records_csv(os, h, recs);
  return os.str();
}

RecordsFile parse_records(const std::string& text) {
  std::istringstream is(text);
  return read_records_csv(is);
}

// expect a CsvError anchored to a specific line; returns its message so the
// caller can also pin the wording
std::string csv_error_at(const std::string& text, int expected_line) {
  try {
    parse_records(text);
  } catch (const CsvError& e) {
    CHECK(e.line == expected_line);
    return e.what();
  }
  FAIL("expected a CsvError");
  return {};
}

std::string config_error_of(const std::string& text) {
  std::istringstream is(text);
  try {
    parse_run_config(is);
  } catch (const ConfigError& e) {
    return e.what();
  }
  FAIL("expected a ConfigError");
  return {};
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("trial record serialization", "[io]") {
  RecordsHeader h;
  h.seed = 987654321;
  h.alpha = 0.5802346737587153;
  h.transmission = 0.457;
  h.xi = 0.05;

  std::vector<TrialRecord> recs;
  recs.push_back({0, TrialKind::Signal, 1, h.alpha, 0.1 + 0.2, -1.0 / 3.0});
  recs.push_back({1, TrialKind::Signal, 0, -h.alpha, 1e-17, -2.5});
  recs.push_back({2, TrialKind::VacuumCalibration, -1, 0.0, -0.007, 123456.789});
  recs.push_back({3, TrialKind::Signal, 1, h.alpha, 2.0, 0.0});

  SECTION("write, read back, write again: byte identical") {
    const std::string once = render_records(h, recs);
    const RecordsFile back = parse_records(once);

    REQUIRE(back.header.seed == h.seed);
    REQUIRE(back.header.alpha == h.alpha);
    REQUIRE(back.header.transmission == h.transmission);
    REQUIRE(back.header.xi == h.xi);
    REQUIRE(back.records.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(back.records[i].index == recs[i].index);
      CHECK(back.records[i].kind == recs[i].kind);
      CHECK(back.records[i].bit == recs[i].bit);
      CHECK(back.records[i].outcome_x == recs[i].outcome_x);
      CHECK(back.records[i].outcome_y == recs[i].outcome_y);
      // not serialized; implied by the header metadata and the bit
      CHECK(back.records[i].sent_amplitude == recs[i].sent_amplitude);
    }

    const std::string twice = render_records(back.header, back.records);
    REQUIRE(twice == once);
  }

  SECTION("shortest round-trip float formatting") {
    // every CSV float goes through the same formatter; parse-back equality
    // is the property that makes re-runs digest-identical
    const double cases[] = {0.1,    1.0 / 3.0, 1e300, 5e-324, -0.0, 123456789.123456789,
                            0.457, 1.0,        0.0};
    for (double v : cases) {
      const std::string s = cvqkd::detail::format_double(v);
      REQUIRE(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(cvqkd::detail::format_double(0.1) == "0.1");
    CHECK(cvqkd::detail::format_double(1.0) == "1");
  }

  SECTION("carriage returns are tolerated") {
    std::string once = render_records(h, recs);
    std::string crlf;
    for (char c : once) {
      if (c == '\n') crlf += '\r';
      crlf += c;
    }
    const RecordsFile back = parse_records(crlf);
    REQUIRE(back.records.size() == recs.size());
    CHECK(back.records[2].outcome_y == recs[2].outcome_y);
  }

  SECTION("blank lines between rows are skipped") {
    std::string once = render_records(h, recs);
    once.insert(once.find("2,vacuum"), "\n");
    const RecordsFile back = parse_records(once);
    REQUIRE(back.records.size() == recs.size());
  }
}

TEST_CASE("records parse failures name the line", "[io]") {
  const std::string good = render_records(
      {11, 0.58, 1.0, 0.0},
      {{0, TrialKind::Signal, 1, 0.58, 0.5, -0.5}, {1, TrialKind::VacuumCalibration, -1, 0.0, 0.0, 0.1}});

  SECTION("empty input") {
    const std::string msg = csv_error_at("", 1);
    CHECK(contains(msg, "empty file"));
  }

  SECTION("missing metadata comment") {
    const std::string msg = csv_error_at("index,kind,bit,outcome_x,outcome_y\n", 1);
    CHECK(contains(msg, "metadata"));
  }

  SECTION("incomplete metadata") {
    const std::string msg = csv_error_at("# seed=1 alpha=0.5 T=1\n", 1);
    CHECK(contains(msg, "seed, alpha, T and xi"));
  }

  SECTION("unknown metadata key") {
    const std::string msg = csv_error_at("# seed=1 alpha=0.5 T=1 xi=0 gamma=2\n", 1);
    CHECK(contains(msg, "unknown metadata key 'gamma'"));
  }

  SECTION("wrong column header") {
    const std::string msg = csv_error_at("# seed=1 alpha=0.5 T=1 xi=0\nindex,kind,bit,x,y\n", 2);
    CHECK(contains(msg, "column header"));
  }

  SECTION("wrong field count") {
    std::string text = good;
    text += "2,signal,1,0.25\n";
    const std::string msg = csv_error_at(text, 5);
    CHECK(contains(msg, "expected 5 fields"));
    CHECK(contains(msg, "line 5"));
  }

  SECTION("malformed number") {
    std::string text = good;
    text += "2,signal,1,notanumber,0.5\n";
    const std::string msg = csv_error_at(text, 5);
    CHECK(contains(msg, "bad number 'notanumber'"));
  }

  SECTION("unknown kind") {
    std::string text = good;
    text += "2,carrier,1,0.5,0.5\n";
    CHECK(contains(csv_error_at(text, 5), "unknown record kind 'carrier'"));
  }

  SECTION("signal bit out of range") {
    std::string text = good;
    text += "2,signal,2,0.5,0.5\n";
    CHECK(contains(csv_error_at(text, 5), "signal bit"));
  }

  SECTION("calibration rows carry no bit") {
    std::string text = good;
    text += "2,vacuum,0,0.5,0.5\n";
    CHECK(contains(csv_error_at(text, 5), "calibration bit"));
  }
}

TEST_CASE("run configuration file", "[io]") {
  SECTION("defaults") {
    const RunConfig cfg = default_run_config();
    REQUIRE(cfg.source.target_overlap.has_value());
    CHECK(*cfg.source.target_overlap == 0.51);
    CHECK(cfg.source.pulse_count == 1000);
    CHECK(cfg.source.vacuum_slots_per_signal == 5);
    CHECK(cfg.source.seed == 42);
    CHECK(cfg.direction == ReconciliationDirection::Direct);
    CHECK_NOTHROW(validate_run_config(cfg));
  }

  SECTION("full parse with comments and inline noise") {
    const std::string text =
        "# run description\n"
        "\n"
        "[source]\n"
        "overlap = 0.65   # two-state source\n"
        "pulse_count = 250000\n"
        "vacuum_slots_per_signal = 5\n"
        "seed = 777\n"
        "\n"
        "[channel]\n"
        "transmission = 0.483\n"
        "excess_noise = 0.05\n"
        "\n"
        "[detector]\n"
        "electronic_noise_rel = 0.002\n"
        "\n"
        "[postselection]\n"
        "threshold = 0.4\n"
        "\n"
        "[ec]\n"
        "efficiency_f = 1.2\n"
        "direction = reverse\n"
        "\n"
        "[witness]\n"
        "tolerance = 1e-9\n"
        "\n"
        "[output]\n"
        "directory = runs/demo\n";
    std::istringstream is(text);
    const RunConfig cfg = parse_run_config(is);
    REQUIRE(cfg.source.target_overlap.has_value());
    CHECK(*cfg.source.target_overlap == 0.65);
    CHECK_FALSE(cfg.source.alpha.has_value());
    CHECK(cfg.source.pulse_count == 250000);
    CHECK(cfg.source.seed == 777);
    CHECK(cfg.channel.transmission == 0.483);
    CHECK(cfg.channel.excess_noise == 0.05);
    CHECK(cfg.detector.electronic_noise_rel == 0.002);
    CHECK(cfg.postselection.threshold == 0.4);
    CHECK(cfg.ec.efficiency_f == 1.2);
    CHECK(cfg.direction == ReconciliationDirection::Reverse);
    CHECK(cfg.witness_tolerance == 1e-9);
    CHECK(cfg.output_dir == "runs/demo");
    CHECK_NOTHROW(validate_run_config(cfg));
  }

  SECTION("a [source] section starts from a clean slate") {
    // the defaults carry an overlap; a file that instead pins the amplitude
    // must not end up with both set
    const std::string text =
        "[source]\n"
        "amplitude = 0.6\n"
        "pulse_count = 10\n"
        "seed = 1\n";
    std::istringstream is(text);
    const RunConfig cfg = parse_run_config(is);
    CHECK_FALSE(cfg.source.target_overlap.has_value());
    REQUIRE(cfg.source.alpha.has_value());
    CHECK(*cfg.source.alpha == 0.6);
    CHECK_NOTHROW(validate_run_config(cfg));
  }

  SECTION("echo round-trips exactly") {
    std::istringstream is(
        "[source]\noverlap = 0.51\npulse_count = 125000\nseed = 3\n"
        "[channel]\ntransmission = 0.457\nexcess_noise_x = 0.0748\nexcess_noise_y = 0.0264\n"
        "[ec]\ndirection = reverse\n");
    const RunConfig cfg = parse_run_config(is);

    std::ostringstream echo1;
    write_run_config(echo1, cfg);
    std::istringstream back(echo1.str());
    const RunConfig cfg2 = parse_run_config(back);
    std::ostringstream echo2;
    write_run_config(echo2, cfg2);
    REQUIRE(echo1.str() == echo2.str());

    CHECK(cfg2.source.pulse_count == 125000);
    REQUIRE(cfg2.channel.excess_noise_x.has_value());
    CHECK(*cfg2.channel.excess_noise_x == 0.0748);
    CHECK(cfg2.direction == ReconciliationDirection::Reverse);
  }

  SECTION("strict schema") {
    CHECK(contains(config_error_of("[beam]\n"), "unknown section [beam]"));
    CHECK(contains(config_error_of("[source]\nwavelength = 800\n"), "unknown key 'wavelength'"));
    CHECK(contains(config_error_of("[source]\nwavelength = 800\n"), "line 2"));
    CHECK(contains(config_error_of("pulse_count = 10\n"), "line 1"));
    CHECK(contains(config_error_of("[channel]\ntransmission = high\n"), "bad number 'high'"));
    CHECK(contains(config_error_of("[postselection]\nclip_negative_slices = maybe\n"),
                   "bad boolean"));
    CHECK(contains(config_error_of("[source]\nseed =\n"), "empty value"));
    CHECK(contains(config_error_of("[source\n"), "unterminated section header"));
    CHECK(contains(config_error_of("[ec]\ndirection = sideways\n"), "'direct' or 'reverse'"));
    CHECK(contains(config_error_of("[source]\npulse_count\n"), "expected key = value"));
  }

  SECTION("validation failures surface as configuration errors") {
    RunConfig cfg = default_run_config();
    cfg.source.alpha = 0.3;  // both ways of pinning the source set at once
    CHECK_THROWS_AS(validate_run_config(cfg), ConfigError);

    RunConfig bad_t = default_run_config();
    bad_t.channel.transmission = 1.5;
    CHECK_THROWS_AS(validate_run_config(bad_t), ConfigError);

    RunConfig bad_f = default_run_config();
    bad_f.ec.efficiency_f = 0.5;  // below the Shannon limit
    CHECK_THROWS_AS(validate_run_config(bad_f), ConfigError);
  }
}

TEST_CASE("run manifest", "[io]") {
  SECTION("digest known answers") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  SECTION("file digest equals in-memory digest") {
    namespace fs = std::filesystem;
    const fs::path p = fs::temp_directory_path() / "cvqkd_digest_probe.bin";
    {
      std::ofstream f(p, std::ios::binary);
      f << "payload\nwith\nlines\n";
    }
    CHECK(sha256_file(p.string()) == sha256_hex("payload\nwith\nlines\n"));
    fs::remove(p);
    CHECK_THROWS_AS(sha256_file(p.string()), IoError);
  }

  SECTION("manifest round trip") {
    RunManifest m;
    m.command = "simulate";
    m.seed = 424242;
    m.started_at = "2024-05-01T10:00:00Z";
    m.finished_at = "2024-05-01T10:00:03Z";
    m.outputs.push_back({"records.csv", sha256_hex("abc")});
    m.outputs.push_back({"manifest.txt", sha256_hex("")});
    std::ostringstream cfg_echo;
    write_run_config(cfg_echo, default_run_config());
    m.config_echo = cfg_echo.str();

    std::ostringstream os;
    write_manifest(os, m);
    std::istringstream is(os.str());
    const RunManifest back = read_manifest(is);

    CHECK(back.tool_version == m.tool_version);
    CHECK(back.command == "simulate");
    CHECK(back.seed == 424242);
    CHECK(back.started_at == m.started_at);
    CHECK(back.finished_at == m.finished_at);
    REQUIRE(back.outputs.size() == 2);
    CHECK(back.outputs[0].name == "records.csv");
    CHECK(back.outputs[0].sha256 == sha256_hex("abc"));
    CHECK(back.config_echo == m.config_echo);

    // the echoed config must itself parse
    std::istringstream cfg_back(back.config_echo);
    CHECK_NOTHROW(validate_run_config(parse_run_config(cfg_back)));
  }

  SECTION("malformed manifests are rejected") {
    std::istringstream bad1("tool_version = x\njunk line\n");
    CHECK_THROWS_AS(read_manifest(bad1), IoError);
    std::istringstream bad2("[outputs]\nrecords.csv = md5:abcd\n");
    CHECK_THROWS_AS(read_manifest(bad2), IoError);
    std::istringstream bad3("mystery_key = 1\n");
    CHECK_THROWS_AS(read_manifest(bad3), IoError);
  }

  SECTION("timestamps are well-formed") {
    const std::string ts = iso8601_utc_now();
    REQUIRE(ts.size() == 20);
    CHECK(ts[4] == '-');
    CHECK(ts[10] == 'T');
    CHECK(ts[19] == 'Z');
  }
}

TEST_CASE("svg rendering", "[io]") {
  std::vector<SvgSeries> series;
  SvgSeries line;
  line.label = "bound <T & o>";  // markup characters must be escaped
  line.points = {{0.45, 0.097}, {0.55, 0.125}, {0.65, 0.158}, {0.75, 0.2}};
  series.push_back(line);
  SvgSeries dots;
  dots.label = "measured";
  dots.points = {{0.5, 0.11}, {0.65, 0.16}};
  dots.points_only = true;
  series.push_back(dots);

  SECTION("deterministic and well-formed") {
    const std::string a = svg_line_plot("noise bound", "overlap", "excess", series);
    const std::string b = svg_line_plot("noise bound", "overlap", "excess", series);
    REQUIRE(a == b);
    REQUIRE(a.rfind("<svg", 0) == 0);
    REQUIRE(a.size() > 7);
    CHECK(a.substr(a.size() - 7) == "</svg>\n");
    CHECK(contains(a, "<polyline"));
    CHECK(contains(a, "<circle"));
    CHECK(contains(a, "noise bound"));
    CHECK(contains(a, "bound &lt;T &amp; o&gt;"));
    CHECK_FALSE(contains(a, "bound <T"));
  }

  SECTION("degenerate ranges do not divide by zero") {
    SvgSeries one;
    one.label = "point";
    one.points = {{0.5, 0.5}};
    const std::string svg = svg_line_plot("single", "x", "y", {one});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(contains(svg, "</svg>"));
  }

  SECTION("key rate table layout") {
    KeyRateReport r;
    r.source_overlap = 0.65;
    r.transmission = 0.483;
    r.tau_opt = 1.5105;
    r.g_dr = 0.00237;
    r.g_rr = 0.01534;
    const std::string table = format_keyrate_table({r});
    REQUIRE(table.rfind(" overlap      T    tau_opt      G_DR      G_RR\n", 0) == 0);
    CHECK(contains(table, "0.65"));
    CHECK(contains(table, "0.483"));
    CHECK(contains(table, "1.5105"));
    // one header plus one row
    CHECK(std::count(table.begin(), table.end(), '\n') == 2);
  }

  SECTION("generic comparison table") {
    std::ostringstream os;
    write_table_csv(os, {"a", "b_reference", "b_computed"}, {{"1", "2", "2"}, {"3", "4", "4"}});
    CHECK(os.str() == "a,b_reference,b_computed\n1,2,2\n3,4,4\n");
  }
}
