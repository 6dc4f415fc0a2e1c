#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gp2d/fock.hpp"
#include "gp2d/kernels.hpp"

namespace gp2d {

inline constexpr std::string_view kSweepSchema = "gp2d-sweep-v1";

/// 64-bit FNV-1a of the text, as 16 lowercase hex digits.
std::string fingerprint(std::string_view text);

/// <Omega, G_eff Omega> = omega_hat(0) (N - 1) / 2.
double vacuum_upper_bound(const GPParameters& params, const RenormPotential& renorm);

struct GroundState {
  double energy = 0.0;
  FockVector vector{linalg::Vector()};
  double depletion = 0.0;  // <xi0, N_+ xi0> / N
  double residual = 0.0;
  bool dense = true;
};

/// Smallest eigenpair: dense per sparsity block while every block has at most
/// dense_cap states, restarted Lanczos otherwise.
GroundState ground_state(const LinearOperator& op, const FockBasis& basis, std::size_t dense_cap = 4000,
                         const linalg::LanczosOptions& lanczos = {});

struct EnergyRecord {
  int N = 0;
  double alpha = 0.0;
  double cutoff = 0.0;
  std::size_t dim = 0;
  double E_vac = 0.0;
  double E0 = 0.0;
  double depletion = 0.0;
  double lambda_group = 0.0;  // lambda_ell R^2
  double omega0 = 0.0;
  double wall_ms = 0.0;

  // kept in the manifest only
  bool ok = false;
  std::string error;
  double lower_bound = 0.0;
  double lower_C = 0.0;
  bool sandwich = false;
  double residual = 0.0;
};

struct SweepConfig {
  std::string potential = "step:2,1";
  std::vector<int> N_values{3, 4, 5, 6, 7, 8};
  std::vector<double> alphas{3.0};
  double cutoff = 2.0 * 3.14159265358979323846 * 16.0;
  double ell_prefactor = 1.0;
  int shell = 4;
  int cap = 0;               // 0: cap = N
  double condensation_c = 0.1;
  bool lower_bound = true;   // run the condensation bound per record
  std::size_t dense_cap = 4000;
  double eig_tol = 1e-10;
  double quad_tol = 1e-11;  // radial ODE relative tolerance
  std::uint64_t seed = 12345;  // Lanczos start vector

  /// One key = value per line, fixed order; input of the fingerprint.
  std::string canonical() const;
};

struct SweepDataset {
  std::vector<EnergyRecord> records;  // sorted by (N, alpha, cutoff)
  std::string fingerprint;
  std::string schema{kSweepSchema};
  std::size_t computed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

EnergyRecord compute_record(const SweepConfig& cfg, int N, double alpha);

/// Runs every (N, alpha) point not already present and successful in a
/// matching manifest under dir, then rewrites energy_sweep.csv and
/// energy_sweep.json there. An empty dir skips persistence.
SweepDataset sweep(const SweepConfig& cfg, const std::filesystem::path& dir);

void write_csv(std::ostream& out, const SweepDataset& ds);
void write_manifest(std::ostream& out, const SweepDataset& ds, const SweepConfig& cfg);
/// Records of a manifest whose schema and fingerprint match, else empty.
std::vector<EnergyRecord> read_manifest(const std::filesystem::path& path, std::string_view fingerprint);

struct TrajectoryPoint {
  int N = 0;
  double omega0 = 0.0;
  double E_vac = 0.0;
  double excess = 0.0;          // E_vac - 2 pi N
  double excess_per_log = 0.0;  // excess / log N
  double omega0_dev = 0.0;      // |omega0 - 4 pi (1 + alpha log N / N)| N
};

struct VacuumTrajectory {
  std::vector<TrajectoryPoint> points;
  double slope = 0.0;      // least squares of excess against log N
  double intercept = 0.0;
  double target = 0.0;     // 2 pi alpha
  double relative_slope_error = 0.0;
  bool in_band = false;    // 0 < excess / log N < 30 everywhere
  bool flattening = false; // last increment of excess / log N no larger than the first
};

/// Scalar pipeline only (no Fock space): Neumann problem and omega_hat(0) per N.
VacuumTrajectory vacuum_trajectory(const RadialPotential& pot, double alpha, double ell_prefactor,
                                   const std::vector<int>& Ns);

}  // namespace gp2d
