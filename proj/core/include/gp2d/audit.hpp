#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gp2d/fock.hpp"
#include "gp2d/kernels.hpp"

namespace gp2d {

struct InequalityReport {
  std::string statement;
  std::vector<double> constants;
  double min_eigenvalue = 0.0;      // of the certified combination
  double recheck_eigenvalue = 0.0;  // same, from an independent Lanczos pass
  double scale = 1.0;               // |lhs|, the reference for the tolerance
  double tolerance = 1e-9;
  std::size_t dim = 0;
  int cap = 0;
  bool pass = false;
  bool unbounded = false;
  std::vector<double> number_profile;  // weight of the extremal vector per N_+ sector
  std::string note;
};

struct MinConstantOptions {
  double rel_tol = 1e-3;
  double psd_tol = 1e-9;
  double c_max = 1e6;
};

/// Minimal c >= 0 with c * sum(rhs) - lhs >= -psd_tol * |lhs|.
InequalityReport min_constant(const LinearOperator& lhs, const std::vector<LinearOperator>& rhs,
                              const FockBasis& basis, const std::string& statement,
                              const MinConstantOptions& opts = {});

/// f, g with f^2 + g^2 = 1, evaluated at N_+ / M.
struct Partition {
  std::function<double(double)> f;
  std::function<double(double)> g;
  double derivative_bound = 0.0;  // max(|f'|, |g'|)

  /// f = 1 below 1/2, 0 above 1, smooth in between.
  static Partition smooth();
  static Partition trivial();
};

struct LocalizationReport {
  double identity_residual = 0.0;
  int M = 0;
  double c_plus = 0.0;   // +Theta_M <= c (log N / M^2) (H_N + 1)
  double c_minus = 0.0;  // -Theta_M <= c (log N / M^2) (H_N + 1)
  double theta_norm = 0.0;
  InequalityReport plus;
  InequalityReport minus;
  double constant() const { return std::max(c_plus, c_minus); }
};

/// Checks R = f R f + g R g + Theta_M with the double-commutator Theta_M and
/// certifies the Theta_M bound.
LocalizationReport localization_check(const LinearOperator& R_eff, const LinearOperator& H_N, const FockBasis& basis,
                                      const Partition& part, int M, bool certify = true);

struct CondensationReport {
  InequalityReport inequality;
  double c = 0.1;
  double C = 0.0;
  double lower_bound = 0.0;  // min spectrum of the certified right-hand side
  double mu = 0.0;           // c / log N
  double scalar_worst = 0.0; // max_p |omega(p)|^2 / (4 (1 - mu) p^2) / (omega(0)/2)
  bool scalar_pass = false;
  double riemann_sum = 0.0;       // 4 pi^2 sum_{K < |p| <= N^alpha} 1/p^2
  double riemann_integral = 0.0;  // int_{K/2 < |q| <= N^alpha + K} dq / q^2
  double riemann_K = 0.0;
  double omega_sum = 0.0;         // 1/4 sum |omega(p)|^2 / p^2
  double omega_minus_log = 0.0;   // omega_sum - 2 pi alpha log N
  bool small_N = true;
};

CondensationReport condensation_lower_bound(const LinearOperator& R_eff, const LinearOperator& H_N,
                                            const FockBasis& basis, const RenormPotential& renorm,
                                            const GPParameters& params, double c = 0.1);

struct ShapePoint {
  double c = 0.0;
  double C = 0.0;
};

struct GNShapeReport {
  std::vector<ShapePoint> front;  // minimal C for each scanned c
  bool nonempty_positive = false; // some c > 0 is certified with finite C
  double ground_energy = 0.0;
  double ground_depletion = 0.0;  // <xi0, N_+ xi0>
  bool depletion_chain = false;   // <N_+> <= (<G> - 2 pi N + C)/c at every front point with c > 0
};

/// Scan of G - 2 pi N - c N_+ + C >= 0 over c in [0, c_max].
GNShapeReport gn_condensation_shape(const LinearOperator& G, const FockBasis& basis, int N, double c_max,
                                    int points = 17);

/// Solves c exp(c x) = kappa for c >= 0 (x >= 0).
double growth_constant(double kappa, double x);

}  // namespace gp2d
