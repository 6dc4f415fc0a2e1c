#pragma once

#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

#include "gp2d/lattice.hpp"
#include "gp2d/potential.hpp"
#include "gp2d/radial.hpp"

namespace gp2d {

/// N, alpha and the cutoff length ell = c N^{-alpha}. The interaction scale
/// e^N only ever appears through logarithms.
struct GPParameters {
  int N = 10;
  double alpha = 3.0;
  double ell_prefactor = 1.0;

  double log_ell() const;
  double ell() const;
  double log_R() const { return N + log_ell(); }  // log(e^N ell)
  double N_alpha() const;

  /// Throws invalid-input unless N >= 2, alpha > 0 and ell < 1/2.
  void validate() const;
  /// e^N ell > R0; the Neumann picture of the kernel needs it.
  bool outside_core(const RadialPotential& pot) const { return log_R() > std::log(pot.range()); }
};

/// Solves the Neumann problem at radius e^N ell. Inside the core regime
/// (e^N ell <= R0) the truncated-ball problem is solved and flagged.
NeumannSolution kernel_neumann(const RadialPotential& pot, const GPParameters& params,
                               const NeumannOptions& opts = {});

/// Continuous-momentum transforms of the rescaled correlation profile:
/// w_hat(k) = 2 pi ell^2 int_0^1 w(R x) J0(k ell x) x dx and eta(k) = -N w_hat(k).
class EtaTransform {
public:
  EtaTransform(const NeumannSolution& sol, const GPParameters& params);

  double w_hat(double k) const;
  double eta(double k) const { return -N_ * w_hat(k); }
  /// int over the torus of |w_{N,ell}|^2.
  double w_sq_integral() const { return w_sq_; }
  double w_at(double r) const { return 1.0 - profile_.value(r); }

private:
  double sum_subdivided(double q) const;

  RadialProfile profile_;
  double R_ = 1.0;
  double ell_ = 1.0;
  double N_ = 0.0;
  double fast_limit_ = 0.0;  // largest k ell served by the precomputed nodes
  std::vector<double> edges_;
  std::vector<double> node_x_;
  std::vector<double> node_c_;
  double w_sq_ = 0.0;
  bool free_ = false;
};

struct KernelTable {
  MomentumLattice lattice;
  std::vector<double> eta;    // per lattice point
  std::vector<double> w_hat;  // per lattice point
  double eta0 = 0.0;
  double w_hat0 = 0.0;
  double norm2 = 0.0;         // (sum over nonzero p of eta_p^2)^{1/2}, by Parseval
  double norm_inf = 0.0;      // max |eta_p| over the stored lattice
  double lattice_p2_max = 0.0;  // max |eta_p| p^2 over the stored lattice
  double sup_p2 = 0.0;        // max |eta_p| p^2 over all nonzero p
  double sup_p2_norm = 0.0;   // |p| attaining sup_p2
  double w_sq_integral = 0.0;
};

struct EtaOptions {
  double sup_scan_factor = 16.0;  // scan |p| up to this multiple of 1/ell
  int sup_scan_points = 3000;
  double sup_window = 2e-3;       // relative window in |p|^2 checked lattice point by point
};

KernelTable eta_coefficients(const EtaTransform& tr, const GPParameters& params, const MomentumLattice& lat,
                             const EtaOptions& opts = {});

/// g_N chi_hat(p / N^alpha), chi_hat(k) = 2 pi J1(|k|)/|k| with chi_hat(0) = pi.
struct RenormPotential {
  double g = 0.0;
  double omega0 = 0.0;
  double mu = 0.0;
  double N_alpha = 1.0;
  std::vector<double> omega;  // per lattice point

  static double chi_hat(double k);
  double at(double k) const { return g * chi_hat(k / N_alpha); }
};

/// g_N = 2 N^{1-2 alpha} e^{2N} lambda_ell, with lambda_ell = mu / R^2 and
/// log R supplied so that no e^{2N} is ever formed.
RenormPotential renormalized_potential(const GPParameters& params, double mu, double log_R, const MomentumLattice& lat);

struct OmegaSumReport {
  double S = 0.0;            // 1/4 sum over all nonzero p of |omega(p)|^2 / p^2
  double S_resplit = 0.0;    // the same with the split radius doubled
  double split_change = 0.0; // |S - S_resplit| / S
  double truncated = 0.0;    // plain sum up to lattice_cutoff; NaN above 4e6 norms
  double lattice_cutoff = 0.0;
  bool saturated = false;    // lattice cutoff >= 2 pi N^alpha
  double minus_log = 0.0;    // S - 2 pi alpha log N
};

OmegaSumReport omega_lattice_sum(const RenormPotential& renorm, const GPParameters& params, double lattice_cutoff,
                                 double split = 0.0);

struct ScatteringResidual {
  std::vector<double> residual;   // per lattice point, relative to (N/2) V_hat(p / e^N)
  double max_relative = 0.0;
  std::vector<double> truncated;  // same identity with lattice-truncated convolutions
  double max_truncated = 0.0;
  double tail_bound = 0.0;        // bound on the omitted convolution tail, relative
  bool truncation_dominated = false;
  bool core_regime = false;
  bool truncated_evaluated = false;
};

ScatteringResidual scattering_residual(const KernelTable& table, const EtaTransform& tr, const RenormPotential& renorm,
                                       const RadialPotential& pot, const GPParameters& params,
                                       double tolerance = 1e-3, std::size_t truncated_limit = 2500);

struct ParsevalReport {
  double lattice_sum = 0.0;  // sum over p != 0 of |w_hat(p)|^2 plus |w_hat(0)|^2
  double integral = 0.0;
  double relative = 0.0;
};

ParsevalReport parseval_check(const EtaTransform& tr, const GPParameters& params);

void write_kernel_csv(std::ostream& out, const KernelTable& table, const RenormPotential& renorm);

}  // namespace gp2d
