#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gp2d/potential.hpp"

namespace gp2d {

struct RadialGrid {
  std::vector<double> r;  // r[0] == 0, strictly increasing, r.back() == domain radius
  std::string scheme = "uniform-in-core+log-tail";
};

struct RadialOptions {
  int core_nodes = 16;         // uniform nodes on (0, min(R0, R)/100]
  int nodes_per_decade = 64;   // log-spaced nodes beyond that
  double rtol = 1e-11;
  double atol = 1e-14;
  double start_fraction = 1e-6;  // series start at start_fraction * min(R0, R)
};

/// Cubic Hermite interpolation of a radial profile from values and
/// r-derivatives on a grid.
class RadialProfile {
public:
  RadialProfile() = default;
  RadialProfile(std::vector<double> r, std::vector<double> f, std::vector<double> fp);

  double value(double r) const;
  double derivative(double r) const;
  double radius() const { return r_.empty() ? 0.0 : r_.back(); }

private:
  std::size_t interval(double r) const;
  std::vector<double> r_;
  std::vector<double> f_;
  std::vector<double> fp_;
};

struct ZeroEnergySolution {
  RadialGrid grid;
  std::vector<double> phi;   // defined up to a positive factor
  std::vector<double> dphi;  // d phi / dr
  double a = 0.0;            // scattering length, 0 for the free potential
  double fit_residual = 0.0;
  double slope = 0.0;        // phi = intercept + slope * log r beyond R0
  double intercept = 1.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool free = false;

  RadialProfile profile() const { return {grid.r, phi, dphi}; }
};

struct ScatteringOptions {
  double window_lo = 1.0;  // fit window (window_lo * R0, window_hi * R0]
  double window_hi = 2.0;
  double fit_tolerance = 1e-8;
  RadialOptions radial;
};

/// Zero-energy solution of -phi'' - phi'/r + V phi / 2 = 0 with phi(0) = 1,
/// phi'(0) = 0, and the scattering length from phi = c log(r / a) beyond R0.
ZeroEnergySolution scattering_length(const RadialPotential& pot, const ScatteringOptions& opts = {});

struct NeumannSolution {
  RadialGrid grid;
  std::vector<double> f;
  std::vector<double> w;
  std::vector<double> fp;
  double lambda = 0.0;
  double mu = 0.0;        // lambda * R^2
  double R = 0.0;
  double log_R = 0.0;
  double a = 0.0;
  double eps = 0.0;       // sqrt(lambda) * R
  double int_vf = 0.0;    // int_{R^2} V f
  double rayleigh = 0.0;  // (int |f'|^2 + V f^2 / 2) / int f^2
  double norm2 = 0.0;     // int_0^R f^2 r dr
  int shots = 0;
  bool free = false;
  bool core_regime = false;         // R <= R0: V truncated by the ball
  std::vector<double> breakpoints;  // potential breakpoints inside (0, R)

  RadialProfile profile() const { return {grid.r, f, fp}; }
  /// Writes columns r, f, w, f'.
  void write_csv(std::ostream& out) const;
};

struct NeumannOptions {
  int scan_steps = 80;     // bracket scan over mu in [0, 40 / log(R/a)]
  double scan_span = 40.0;
  bool allow_core = false;  // accept R <= R0 (ball cuts through the potential)
  RadialOptions radial;
};

/// Lowest Neumann eigenpair of -f'' - f'/r + V f / 2 = lambda f on [0, R],
/// normalized to f(R) = 1.
NeumannSolution neumann_ground_state(const RadialPotential& pot, double R, const NeumannOptions& opts = {});
NeumannSolution neumann_ground_state_log(const RadialPotential& pot, double log_R, const NeumannOptions& opts = {});

/// psi_k(r) = J0(k r) - J0(k a)/Y0(k a) Y0(k r), with k the smallest positive
/// root of psi_k'(R) = 0.
struct TrialOracle {
  double k = 0.0;
  double R = 0.0;
  double a = 0.0;
  double ratio = 0.0;  // J0(k a) / Y0(k a)
  double euler_gamma = 0.0;

  double psi(double r) const;
  double dpsi(double r) const;
};

TrialOracle trial_wavenumber(double R, double a);

/// <Psi, h Psi> / <Psi, Psi> for the trial state psi_k(m(r)),
/// m = a exp(phi / slope), built from a zero-energy solution.
double trial_rayleigh_quotient(const RadialPotential& pot, const ZeroEnergySolution& ze, const TrialOracle& oracle);

struct AsymptoticsReport {
  double L = 0.0;  // log(R / a); +inf for the free potential
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
  double e4 = 0.0;
  bool e1_finite = true;
  bool e2_finite = true;
  bool e3_finite = true;
  bool e4_finite = true;
};

AsymptoticsReport validate_neumann_asymptotics(const NeumannSolution& sol, const RadialPotential& pot);

/// sup over r in [0, R/2] of |f_R(r) - phi_R(r)|, phi_R normalized to 1 at R.
double zero_energy_deviation(const NeumannSolution& sol, const ZeroEnergySolution& ze);

}  // namespace gp2d
