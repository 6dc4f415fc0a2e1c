#pragma once

#include <functional>
#include <string>
#include <vector>

namespace gp2d {

enum class PotentialKind { step, gaussian_bump, tabulated };

/// Compactly supported, non-negative radial pair potential.
///
/// step:          V(r) = V0 for r <= b, 0 beyond; range R0 = b.
/// gaussian_bump: V(r) = V0 exp(1 - 1/(1 - (r/R0)^2)) inside R0, a C-infinity
///                bump with V(0) = V0.
/// tabulated:     piecewise linear through (r_i, V_i), zero beyond the last
///                node; the last node is the range.
///
/// The norms are the two-dimensional Lebesgue norms of x -> V(|x|).
class RadialPotential {
public:
  static RadialPotential step(double v0, double b);
  static RadialPotential gaussian_bump(double v0, double r0);
  static RadialPotential tabulated(std::vector<double> r, std::vector<double> v);
  static RadialPotential zero() { return step(0.0, 1.0); }

  /// Reads a two-column table introduced by the line "# radial-potential v1".
  static RadialPotential from_file(const std::string& path);
  static RadialPotential parse_table(const std::string& text);

  /// Accepts "step:V0,b", "bump:V0,R0" or "table:PATH".
  static RadialPotential from_spec(const std::string& spec);
  std::string spec() const;

  double operator()(double r) const;

  PotentialKind kind() const { return kind_; }
  double strength() const { return v0_; }
  double range() const { return r0_; }
  bool is_zero() const { return zero_; }

  /// Radii where V or a derivative jumps, in (0, range()].
  const std::vector<double>& breakpoints() const { return breaks_; }

  double l1() const { return l1_; }
  double l2() const { return l2_; }
  double l3() const { return l3_; }

  const std::vector<double>& table_r() const { return tr_; }
  const std::vector<double>& table_v() const { return tv_; }

private:
  RadialPotential() = default;
  void finalize();

  PotentialKind kind_ = PotentialKind::step;
  double v0_ = 0.0;
  double r0_ = 1.0;
  bool zero_ = true;
  std::vector<double> tr_;
  std::vector<double> tv_;
  std::vector<double> breaks_;
  std::string source_;
  double l1_ = 0.0;
  double l2_ = 0.0;
  double l3_ = 0.0;
};

/// 2*pi * int_0^R0 V(r) J0(k r) r dr, the two-dimensional Fourier transform
/// of V at any wave vector of length |k|.
double fourier_transform_radial(const RadialPotential& pot, double k);

/// 2*pi * int_0^R0 V(r) h(r) J0(k r) r dr for a caller-supplied weight h.
/// Panels are split at the potential's breakpoints and at half periods of J0.
double weighted_hankel(const RadialPotential& pot, double k,
                       const std::function<double(double)>& h);

/// Splits [0, R0] into integration panels: breakpoints, half periods of
/// J0(k r), and at least `min_panels` equal pieces.
std::vector<double> hankel_panels(const RadialPotential& pot, double k, int min_panels = 8);

}  // namespace gp2d
