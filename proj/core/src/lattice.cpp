#include "gp2d/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gp2d/error.hpp"
#include "gp2d/parallel.hpp"
#include "quadrature.hpp"

namespace gp2d {

MomentumLattice::MomentumLattice(double cutoff, std::vector<LatticePoint> points)
    : cutoff_(cutoff), points_(std::move(points)) {
  index_.reserve(points_.size() * 2);
  for (std::size_t i = 0; i < points_.size(); ++i) index_[key(points_[i].n1, points_[i].n2)] = static_cast<long>(i);
  neg_.resize(points_.size());
  norm_class_.resize(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    neg_[i] = index(-points_[i].n1, -points_[i].n2);
    if (norms_.empty() || norms_.back() != points_[i].m) norms_.push_back(points_[i].m);
    norm_class_[i] = norms_.size() - 1;
  }
}

long MomentumLattice::index(int n1, int n2) const {
  const auto it = index_.find(key(n1, n2));
  return it == index_.end() ? -1 : it->second;
}

MomentumLattice build_lattice(double cutoff) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (!(cutoff >= two_pi * (1.0 - 1e-12))) {
    throw Error(ErrorKind::empty_lattice, "lattice cutoff below 2*pi leaves no points");
  }
  const double q = cutoff / two_pi;
  const auto m_max = static_cast<std::int64_t>(std::floor(q * q * (1.0 + 1e-12)));
  const int n_max = static_cast<int>(std::floor(std::sqrt(static_cast<double>(m_max))));
  std::vector<LatticePoint> pts;
  for (int a = -n_max; a <= n_max; ++a) {
    for (int b = -n_max; b <= n_max; ++b) {
      const std::int64_t m = static_cast<std::int64_t>(a) * a + static_cast<std::int64_t>(b) * b;
      if (m == 0 || m > m_max) continue;
      pts.push_back({a, b, m, two_pi * std::sqrt(static_cast<double>(m))});
    }
  }
  std::sort(pts.begin(), pts.end(), [](const LatticePoint& x, const LatticePoint& y) {
    if (x.m != y.m) return x.m < y.m;
    if (x.n1 != y.n1) return x.n1 < y.n1;
    return x.n2 < y.n2;
  });
  return MomentumLattice(cutoff, std::move(pts));
}

std::vector<int> two_square_counts(std::int64_t m_max) {
  std::vector<int> r2(static_cast<std::size_t>(m_max + 1), 0);
  const auto n_max = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(m_max))));
  for (std::int64_t a = -n_max; a <= n_max; ++a) {
    for (std::int64_t b = -n_max; b <= n_max; ++b) {
      const std::int64_t m = a * a + b * b;
      if (m <= m_max) ++r2[static_cast<std::size_t>(m)];
    }
  }
  return r2;
}

double smooth_cutoff(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / (1.0 - t));
  const double b = std::exp(-1.0 / t);
  return a / (a + b);
}

RadialSumResult radial_lattice_sum(const RadialSumSpec& spec) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double K1 = spec.k_split;
  const double K2 = 2.0 * K1;
  auto psi = [&](double k) { return smooth_cutoff((k - K1) / K1); };

  RadialSumResult out;
  const double q = K2 / two_pi;
  const auto m_max = static_cast<std::int64_t>(std::floor(q * q));
  const auto r2 = two_square_counts(m_max);
  std::vector<std::int64_t> ms;
  for (std::int64_t m = 1; m <= m_max; ++m) {
    if (r2[static_cast<std::size_t>(m)] > 0) ms.push_back(m);
  }
  std::vector<double> terms(ms.size());
  parallel_for(ms.size(), [&](std::size_t i) {
    const double k = two_pi * std::sqrt(static_cast<double>(ms[i]));
    terms[i] = r2[static_cast<std::size_t>(ms[i])] * spec.F(k) * psi(k);
  });
  out.lattice_part = pairwise_sum(terms);

  // panels: geometric from K1, capped at max_panel, with a cut at 2 K1
  std::vector<double> edges{K1};
  while (edges.back() < spec.k_far) {
    const double e = edges.back();
    double w = std::min(0.25 * e, spec.max_panel);
    if (e < K2 && e + w > K2) w = K2 - e;
    edges.push_back(std::min(e + w, spec.k_far));
  }
  std::vector<double> pieces(edges.size() - 1);
  parallel_for(pieces.size(), [&](std::size_t i) {
    pieces[i] = detail::gl16_panel(
        [&](double k) { return spec.F(k) * (1.0 - psi(k)) * k; }, edges[i], edges[i + 1]);
  });
  out.continuum_part = pairwise_sum(pieces) / two_pi;
  out.tail_part = spec.tail ? spec.tail(spec.k_far) : 0.0;
  out.total = out.lattice_part + out.continuum_part + out.tail_part;
  return out;
}

}  // namespace gp2d
