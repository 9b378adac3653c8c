#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cvqkd/cli.hpp"
#include "cvqkd/version.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int workers = 1;
  std::string format = "csv";
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "run configuration file");
  sub->add_option("--seed", o.seed, "override the configured RNG seed");
  sub->add_option("--out", o.out_dir, "output directory (default: config [output] directory)");
  sub->add_option("--workers", o.workers, "worker threads for grids and sampling")
      ->check(CLI::PositiveNumber);
  sub->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"csv", "svg"}));
}

cvqkd::RunConfig load_config(const CommonOpts& o) {
  cvqkd::RunConfig cfg;
  if (o.config_path.empty()) {
    cfg = cvqkd::default_run_config();
  } else {
    std::ifstream f(o.config_path);
    if (!f) throw cvqkd::ConfigError("cannot open config '" + o.config_path + "'");
    try {
      cfg = cvqkd::parse_run_config(f);
    } catch (const cvqkd::ConfigError& e) {
      throw cvqkd::ConfigError(o.config_path + ": " + e.what());
    }
  }
  if (o.seed) cfg.source.seed = *o.seed;
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous-variable QKD link simulator and analysis toolkit"};
  app.set_version_flag("--version", std::string("cvqkd ") + cvqkd::kVersion);
  app.require_subcommand(1);

  CommonOpts sim_o, ana_o, wit_o, bnd_o, key_o, rep_o;
  std::string records_path, target;

  add_common(app.add_subcommand("simulate", "sample a heterodyne record batch"), sim_o);
  auto* ana = app.add_subcommand("analyze", "estimation and witness chain over a records file");
  add_common(ana, ana_o);
  ana->add_option("--records", records_path, "records CSV produced by simulate")->required();
  add_common(app.add_subcommand("witness", "witness verdict at the configured operating point"),
             wit_o);
  add_common(app.add_subcommand("bounds", "tolerable excess-variance curve"), bnd_o);
  add_common(app.add_subcommand("keyrate", "postselection key rates"), key_o);
  auto* rep = app.add_subcommand("reproduce", "re-run a reference experiment");
  add_common(rep, rep_o);
  rep->add_option("target", target, "one of table1, table2, fig2, fig9")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad flags are configuration errors
  }

  try {
    if (app.got_subcommand("simulate")) {
      const auto cfg = load_config(sim_o);
      cvqkd::cli::cmd_simulate(cfg, cfg.output_dir, sim_o.workers, std::cout);
    } else if (app.got_subcommand("analyze")) {
      const auto cfg = load_config(ana_o);
      cvqkd::cli::cmd_analyze(records_path, cfg, cfg.output_dir, ana_o.format, std::cout);
    } else if (app.got_subcommand("witness")) {
      const auto cfg = load_config(wit_o);
      cvqkd::cli::cmd_witness(cfg, cfg.output_dir, std::cout);
    } else if (app.got_subcommand("bounds")) {
      const auto cfg = load_config(bnd_o);
      cvqkd::cli::cmd_bounds(cfg, cfg.output_dir, bnd_o.workers, bnd_o.format, std::cout);
    } else if (app.got_subcommand("keyrate")) {
      const auto cfg = load_config(key_o);
      cvqkd::cli::cmd_keyrate(cfg, cfg.output_dir, std::cout);
    } else if (app.got_subcommand("reproduce")) {
      const std::string out = rep_o.out_dir.empty() ? "out" : rep_o.out_dir;
      cvqkd::cli::cmd_reproduce(target, out, rep_o.workers, rep_o.format, std::cout);
    }
  } catch (const cvqkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cvqkd::cli::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const cvqkd::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const cvqkd::CsvError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
