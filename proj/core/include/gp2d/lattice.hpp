#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

namespace gp2d {

struct LatticePoint {
  int n1 = 0;
  int n2 = 0;
  std::int64_t m = 0;  // n1^2 + n2^2
  double norm = 0.0;   // |p| = 2 pi sqrt(m)
};

/// Nonzero points of 2 pi Z^2 inside a disk, ordered by |p|^2 and then
/// lexicographically in (n1, n2).
class MomentumLattice {
public:
  MomentumLattice() = default;
  MomentumLattice(double cutoff, std::vector<LatticePoint> points);

  double cutoff() const { return cutoff_; }
  std::size_t size() const { return points_.size(); }
  const LatticePoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<LatticePoint>& points() const { return points_; }

  /// Ordinal of (n1, n2), or -1 when absent.
  long index(int n1, int n2) const;
  long negative(std::size_t i) const { return neg_[i]; }

  /// Distinct values of m with the ordinal of their norm class per point.
  const std::vector<std::int64_t>& norms() const { return norms_; }
  std::size_t norm_class(std::size_t i) const { return norm_class_[i]; }

private:
  static std::uint64_t key(int n1, int n2) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(n1)) << 32) | static_cast<std::uint32_t>(n2);
  }
  double cutoff_ = 0.0;
  std::vector<LatticePoint> points_;
  std::unordered_map<std::uint64_t, long> index_;
  std::vector<long> neg_;
  std::vector<std::int64_t> norms_;
  std::vector<std::size_t> norm_class_;
};

MomentumLattice build_lattice(double cutoff);

/// r2(m) = #{(n1, n2) in Z^2 : n1^2 + n2^2 = m} for m = 0..m_max.
std::vector<int> two_square_counts(std::int64_t m_max);

/// Sum over p in 2 pi Z^2 \ {0} of a radial function F(|p|), split smoothly at
/// k_split: the lattice carries F psi, where psi = 1 below k_split and 0 above
/// 2 k_split, and the remainder F (1 - psi) is integrated over the plane.
struct RadialSumSpec {
  std::function<double(double)> F;
  double k_split = 0.0;
  double k_far = 0.0;          // numerical continuum integration ends here
  double max_panel = 0.0;      // widest Gauss-Legendre panel in k
  std::function<double(double)> tail;  // int_{k_far}^inf F(k) k dk / (2 pi)
};

struct RadialSumResult {
  double total = 0.0;
  double lattice_part = 0.0;
  double continuum_part = 0.0;
  double tail_part = 0.0;
};

RadialSumResult radial_lattice_sum(const RadialSumSpec& spec);

/// C-infinity step: 1 for t <= 0, 0 for t >= 1.
double smooth_cutoff(double t);

}  // namespace gp2d
