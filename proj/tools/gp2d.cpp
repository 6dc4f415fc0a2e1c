// gp2d: command line front end of the laboratory.
//
//   gp2d <command> [--config PATH] [--out DIR] [--threads K] [--seed S]
//        [--strict] [--emit-plots-script] [--print-config]
//
// Commands: scatter, neumann, kernels, fock-audit, lower-bound,
// energy-sweep, all. GP2D_OUT replaces the configured output directory
// unless --out is given.

#include <iostream>

#include <CLI11.hpp>

#include "gp2d/cli.hpp"
#include "gp2d/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gp2d: desk-scale laboratory for the two-dimensional Bose gas in the Gross-Pitaevskii regime"};
  app.set_version_flag("--version", std::string(gp2d::kToolVersion));

  std::string command;
  std::string config_path;
  std::string out_dir;
  int threads = 1;
  long long seed = -1;
  bool strict = false;
  bool plots = false;
  bool print_config = false;
  bool quiet = false;

  app.add_option("command", command, "what to run")
      ->required()
      ->check(CLI::IsMember(gp2d::known_commands()));
  app.add_option("-c,--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_dir, "output directory (beats GP2D_OUT and the config)");
  app.add_option("-j,--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--seed", seed, "seed for randomized eigensolver starts")->check(CLI::NonNegativeNumber);
  app.add_flag("--strict", strict, "treat warnings and failed diagnostics as failures");
  app.add_flag("--emit-plots-script", plots, "write plots.gp next to the CSV files");
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");
  app.add_flag("-q,--quiet", quiet, "no summary table");
  CLI11_PARSE(app, argc, argv);

  try {
    gp2d::RunConfig cfg = config_path.empty() ? gp2d::RunConfig{} : gp2d::load_config(config_path);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.validate();
    if (print_config) {
      std::cout << cfg.canonical();
      return 0;
    }

    gp2d::DispatchOptions opts;
    opts.out = out_dir;
    opts.threads = threads;
    opts.strict = strict;
    opts.emit_plots_script = plots;
    opts.log = quiet ? nullptr : &std::cout;
    if (!quiet) {
      std::cout << "gp2d " << gp2d::kToolVersion << "  config " << cfg.fingerprint() << "  out "
                << gp2d::resolve_out_dir(cfg, out_dir).string() << "\n";
    }
    const auto manifest = gp2d::dispatch(command, cfg, opts);
    const int status = manifest.exit_status(strict);
    if (!quiet) {
      std::cout << (status == 0 ? "all selected audits passed" : "some audits failed") << " ("
                << manifest.warning_count() << " warnings)\n";
    }
    return status;
  } catch (const gp2d::Error& e) {
    std::cerr << "gp2d: " << gp2d::to_string(e.kind()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gp2d: " << e.what() << "\n";
    return 2;
  }
}
