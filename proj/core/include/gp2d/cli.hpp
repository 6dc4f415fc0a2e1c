#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gp2d/energy.hpp"

namespace gp2d {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Everything a run depends on. Parsed from "key = value" lines; '#' starts
/// a comment, lists are comma separated, integer lists also accept a..b.
struct RunConfig {
  std::string potential = "step:2,1";
  double alpha = 3.0;
  std::vector<int> N{3, 4, 5};                       // Fock builds and audits
  std::vector<int> kernel_N{8, 10, 12, 14};          // kernel tables
  std::vector<int> scalar_N{10, 20, 30, 40, 50, 60}; // scalar trajectories
  std::vector<int> sweep_N{3, 4, 5, 6, 7, 8};        // energy sweep
  std::vector<double> neumann_R{1e3, 1e4, 1e5, 1e6};
  double cutoff = 2.0 * 3.14159265358979323846 * 16.0;
  double ell_prefactor = 1.0;
  int shell = 4;
  int cap = 0;  // 0: chosen by shell, see cap_for
  double quad_tol = 1e-11;
  double eig_tol = 1e-10;
  double psd_tol = 1e-9;
  double condensation_c = 0.1;
  std::uint64_t seed = 12345;
  std::string out = "gp2d-out";
  std::vector<std::string> audits{"algebra", "ngrow", "angrow", "expahn", "localization", "condensation", "gn-shape"};

  /// N on the 4-shell, min(N, 5) on the 8-shell, min(N, 3) on the 12-shell.
  int cap_for(int n) const;
  bool audit_selected(std::string_view name) const;

  /// Throws config errors naming the violated invariant.
  void validate() const;
  /// Every key in fixed order; parse_config(canonical()) reproduces *this.
  std::string canonical() const;
  /// Fingerprint of canonical() without the output directory.
  std::string fingerprint() const;
  SweepConfig sweep_config() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// The audit names accepted by the "audits" key.
const std::vector<std::string>& known_audits();
const std::vector<std::string>& known_commands();

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool audit = true;  // false: diagnostic, a failure only warns
  std::string detail;
};

struct CommandStatus {
  std::string command;
  bool ok = true;
  std::string stage;  // failing stage when !ok
  std::string error;
  std::vector<std::string> artifacts;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
};

struct RunManifest {
  std::string fingerprint;
  std::string version{kToolVersion};
  std::vector<CommandStatus> commands;

  bool audits_passed() const;
  std::size_t warning_count() const;
  /// 0 iff no command failed and every audit check passed; with strict,
  /// warnings and failed diagnostics count as failures too.
  int exit_status(bool strict) const;
};

struct DispatchOptions {
  std::filesystem::path out;  // overrides cfg.out when non-empty
  int threads = 1;
  bool strict = false;
  bool emit_plots_script = false;
  std::ostream* log = nullptr;  // one-screen summary; nullptr for silence
};

/// Runs one command, writes its artifacts and run_manifest.json under the
/// output directory and returns the manifest.
RunManifest dispatch(std::string_view command, const RunConfig& cfg, const DispatchOptions& opts);

/// Output directory after the GP2D_OUT override.
std::filesystem::path resolve_out_dir(const RunConfig& cfg, const std::filesystem::path& flag);

void write_run_manifest(std::ostream& out, const RunManifest& m);

}  // namespace gp2d
