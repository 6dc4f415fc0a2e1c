#include "gp2d/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <boost/math/tools/minima.hpp>

#include "gp2d/bessel.hpp"
#include "gp2d/error.hpp"
#include "gp2d/parallel.hpp"
#include "quadrature.hpp"

namespace gp2d {
namespace {

constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr std::int64_t kDirectNormLimit = 4'000'000;

bool is_sum_of_two_squares(std::int64_t m) {
  for (std::int64_t a = 0; a * a <= m; ++a) {
    const std::int64_t r = m - a * a;
    auto b = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(r))));
    while (b * b > r) --b;
    while ((b + 1) * (b + 1) <= r) ++b;
    if (b * b == r) return true;
  }
  return false;
}

}  // namespace

double GPParameters::log_ell() const { return std::log(ell_prefactor) - alpha * std::log(static_cast<double>(N)); }
double GPParameters::ell() const { return std::exp(log_ell()); }
double GPParameters::N_alpha() const { return std::pow(static_cast<double>(N), alpha); }

void GPParameters::validate() const {
  if (N < 2) throw Error(ErrorKind::invalid_input, "N must be at least 2");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorKind::invalid_input, "alpha must be positive");
  if (!(ell_prefactor > 0.0)) throw Error(ErrorKind::invalid_input, "ell prefactor must be positive");
  if (!(ell() < 0.5)) throw Error(ErrorKind::invalid_input, "ell = c N^-alpha must be below 1/2");
}

NeumannSolution kernel_neumann(const RadialPotential& pot, const GPParameters& params, const NeumannOptions& opts) {
  params.validate();
  NeumannOptions o = opts;
  o.allow_core = true;
  return neumann_ground_state_log(pot, params.log_R(), o);
}

// ---------------------------------------------------------------------------

EtaTransform::EtaTransform(const NeumannSolution& sol, const GPParameters& params)
    : R_(sol.R), ell_(params.ell()), N_(params.N), free_(sol.free) {
  if (std::fabs(sol.log_R - params.log_R()) > 1e-9 * std::max(1.0, std::fabs(sol.log_R))) {
    throw Error(ErrorKind::invalid_input, "Neumann solution radius differs from e^N ell");
  }
  profile_ = sol.profile();
  if (free_) return;

  // base panels in x = r / R: thinned grid nodes, breakpoints, uniform 0.05 steps
  std::vector<double> e{0.0};
  double last = 0.0;
  const auto& r = sol.grid.r;
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double x = r[i] / R_;
    const bool is_break =
        std::any_of(sol.breakpoints.begin(), sol.breakpoints.end(), [&](double b) { return std::fabs(b - r[i]) <= 1e-12 * b; });
    if (is_break || x >= 1.5 * last || i + 1 == r.size()) {
      e.push_back(x);
      last = x;
    }
  }
  for (int j = 1; j < 20; ++j) e.push_back(0.05 * j);
  std::sort(e.begin(), e.end());
  for (double x : e) {
    if (edges_.empty() || x > edges_.back() + 1e-15) edges_.push_back(x);
  }
  edges_.back() = 1.0;

  double widest = 0.0;
  const auto& q = detail::gl16();
  double wsq = 0.0;
  for (std::size_t i = 0; i + 1 < edges_.size(); ++i) {
    const double a = edges_[i];
    const double b = edges_[i + 1];
    widest = std::max(widest, b - a);
    const double h = 0.5 * (b - a);
    const double m = 0.5 * (a + b);
    for (int j = 0; j < 16; ++j) {
      const double x = m + h * q.x[j];
      const double W = w_at(R_ * x);
      node_x_.push_back(x);
      node_c_.push_back(h * q.w[j] * W * x);
      wsq += h * q.w[j] * W * W * x;
    }
  }
  fast_limit_ = pi / widest;
  w_sq_ = two_pi * ell_ * ell_ * wsq;
}

double EtaTransform::sum_subdivided(double qk) const {
  const auto& q = detail::gl16();
  double s = 0.0;
  std::size_t base = 0;
  for (std::size_t i = 0; i + 1 < edges_.size(); ++i, base += 16) {
    const double a = edges_[i];
    const double b = edges_[i + 1];
    const int pieces = static_cast<int>(std::ceil(qk * (b - a) / pi));
    if (pieces <= 1) {
      for (int j = 0; j < 16; ++j) s += node_c_[base + j] * bessel::j0(qk * node_x_[base + j]);
      continue;
    }
    const double d = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
      const double lo = a + p * d;
      const double h = 0.5 * d;
      const double m = lo + h;
      for (int j = 0; j < 16; ++j) {
        const double x = m + h * q.x[j];
        s += h * q.w[j] * w_at(R_ * x) * x * bessel::j0(qk * x);
      }
    }
  }
  return s;
}

double EtaTransform::w_hat(double k) const {
  if (free_) return 0.0;
  const double qk = std::fabs(k) * ell_;
  double s = 0.0;
  if (qk <= fast_limit_) {
    for (std::size_t j = 0; j < node_x_.size(); ++j) s += node_c_[j] * bessel::j0(qk * node_x_[j]);
  } else {
    s = sum_subdivided(qk);
  }
  return two_pi * ell_ * ell_ * s;
}

// ---------------------------------------------------------------------------

KernelTable eta_coefficients(const EtaTransform& tr, const GPParameters& params, const MomentumLattice& lat,
                             const EtaOptions& opts) {
  KernelTable t;
  t.lattice = lat;
  const auto& norms = lat.norms();
  std::vector<double> wn(norms.size());
  parallel_for(norms.size(), [&](std::size_t i) { wn[i] = tr.w_hat(two_pi * std::sqrt(static_cast<double>(norms[i]))); });
  const double N = params.N;
  t.eta.resize(lat.size());
  t.w_hat.resize(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) {
    t.w_hat[i] = wn[lat.norm_class(i)];
    t.eta[i] = -N * t.w_hat[i];
    t.norm_inf = std::max(t.norm_inf, std::fabs(t.eta[i]));
    t.lattice_p2_max = std::max(t.lattice_p2_max, std::fabs(t.eta[i]) * lat[i].norm * lat[i].norm);
  }
  t.w_hat0 = tr.w_hat(0.0);
  t.eta0 = -N * t.w_hat0;
  t.w_sq_integral = tr.w_sq_integral();
  t.norm2 = std::sqrt(std::max(0.0, N * N * t.w_sq_integral - t.eta0 * t.eta0));

  // supremum of |eta_p| p^2 over the whole lattice
  auto g = [&](double k) { return std::fabs(tr.eta(k)) * k * k; };
  const double k_lo = two_pi;
  const double k_hi = std::max(4.0 * pi, opts.sup_scan_factor / params.ell());
  const double m_hi = (k_hi / two_pi) * (k_hi / two_pi);
  t.sup_p2 = t.lattice_p2_max;
  t.sup_p2_norm = 0.0;
  auto consider_m = [&](std::int64_t m) {
    const double k = two_pi * std::sqrt(static_cast<double>(m));
    const double v = g(k);
    if (v > t.sup_p2) {
      t.sup_p2 = v;
      t.sup_p2_norm = k;
    }
  };
  if (m_hi <= 2e4) {
    for (std::int64_t m = 1; m <= static_cast<std::int64_t>(m_hi); ++m) {
      if (is_sum_of_two_squares(m)) consider_m(m);
    }
    return t;
  }
  const int n = opts.sup_scan_points;
  std::vector<double> ks(n);
  std::vector<double> gs(n);
  for (int i = 0; i < n; ++i) ks[i] = k_lo * std::pow(k_hi / k_lo, static_cast<double>(i) / (n - 1));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) { gs[i] = g(ks[i]); });
  const auto best = static_cast<int>(std::max_element(gs.begin(), gs.end()) - gs.begin());
  const double a = ks[std::max(0, best - 1)];
  const double b = ks[std::min(n - 1, best + 1)];
  const auto peak = boost::math::tools::brent_find_minima([&](double k) { return -g(k); }, a, b, 40);
  const double k_star = peak.first;
  const double m_star = (k_star / two_pi) * (k_star / two_pi);
  const auto m_a = static_cast<std::int64_t>(std::floor(m_star * (1.0 - opts.sup_window)));
  const auto m_b = static_cast<std::int64_t>(std::ceil(m_star * (1.0 + opts.sup_window)));
  std::vector<std::int64_t> cand;
  for (std::int64_t m = std::max<std::int64_t>(1, m_a); m <= m_b; ++m) {
    if (is_sum_of_two_squares(m)) cand.push_back(m);
  }
  std::vector<double> vals(cand.size());
  parallel_for(cand.size(), [&](std::size_t i) { vals[i] = g(two_pi * std::sqrt(static_cast<double>(cand[i]))); });
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (vals[i] > t.sup_p2) {
      t.sup_p2 = vals[i];
      t.sup_p2_norm = two_pi * std::sqrt(static_cast<double>(cand[i]));
    }
  }
  return t;
}

// ---------------------------------------------------------------------------

double RenormPotential::chi_hat(double k) {
  k = std::fabs(k);
  if (k < 1e-6) return pi * (1.0 - k * k / 8.0);
  return two_pi * bessel::j1(k) / k;
}

RenormPotential renormalized_potential(const GPParameters& params, double mu, double log_R, const MomentumLattice& lat) {
  params.validate();
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw Error(ErrorKind::invalid_input, "lambda_ell must be non-negative");
  RenormPotential rp;
  const double logN = std::log(static_cast<double>(params.N));
  if (mu > 0.0) {
    const double log_g = std::log(2.0) + (1.0 - 2.0 * params.alpha) * logN + 2.0 * params.N + std::log(mu) - 2.0 * log_R;
    rp.g = std::exp(log_g);
  }
  rp.mu = mu;
  rp.N_alpha = params.N_alpha();
  rp.omega0 = pi * rp.g;
  rp.omega.resize(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) rp.omega[i] = rp.at(lat[i].norm);
  return rp;
}

OmegaSumReport omega_lattice_sum(const RenormPotential& renorm, const GPParameters& params, double lattice_cutoff,
                                 double split) {
  OmegaSumReport rep;
  rep.lattice_cutoff = lattice_cutoff;
  const double Na = renorm.N_alpha;
  rep.saturated = lattice_cutoff >= two_pi * Na;
  rep.minus_log = -two_pi * params.alpha * std::log(static_cast<double>(params.N));
  if (renorm.g == 0.0) return rep;

  const double g2 = renorm.g * renorm.g;
  auto F = [&](double k) {
    const double w = renorm.at(k);
    return 0.25 * w * w / (k * k);
  };
  auto hybrid = [&](double k_split) {
    RadialSumSpec spec;
    spec.F = F;
    spec.k_split = k_split;
    spec.k_far = std::max(4.0 * k_split, 2000.0 * Na);
    spec.max_panel = 0.5 * pi * Na;
    // averaged J1^2 ~ 1/(pi u): tail = g^2 / (6 U^3) with U = k_far / N^alpha
    spec.tail = [&](double k_far) {
      const double U = k_far / Na;
      return g2 / (6.0 * U * U * U);
    };
    return radial_lattice_sum(spec).total;
  };
  if (!(split > 0.0)) split = two_pi * 32.0;
  rep.S = hybrid(split);
  rep.S_resplit = hybrid(2.0 * split);
  rep.split_change = std::fabs(rep.S - rep.S_resplit) / std::fabs(rep.S);

  // direct truncated sum for comparison, skipped when the disk is too large to enumerate
  const double q = lattice_cutoff / two_pi;
  const auto m_max = static_cast<std::int64_t>(std::floor(q * q * (1.0 + 1e-12)));
  if (m_max > kDirectNormLimit) {
    rep.truncated = std::numeric_limits<double>::quiet_NaN();
    rep.minus_log += rep.S;
    return rep;
  }
  const auto r2 = two_square_counts(m_max);
  std::vector<double> terms;
  for (std::int64_t m = 1; m <= m_max; ++m) {
    const int c = r2[static_cast<std::size_t>(m)];
    if (c) terms.push_back(c * F(two_pi * std::sqrt(static_cast<double>(m))));
  }
  rep.truncated = pairwise_sum(terms);
  rep.minus_log += rep.S;
  return rep;
}

// ---------------------------------------------------------------------------

ScatteringResidual scattering_residual(const KernelTable& table, const EtaTransform& tr, const RenormPotential& renorm,
                                       const RadialPotential& pot, const GPParameters& params, double tolerance,
                                       std::size_t truncated_limit) {
  ScatteringResidual out;
  const auto& lat = table.lattice;
  out.residual.assign(lat.size(), 0.0);
  out.core_regime = !params.outside_core(pot);
  if (pot.is_zero()) return out;

  const double N = params.N;
  const double ell = params.ell();
  const double mu = renorm.mu;
  const double inv_eN = std::exp(-static_cast<double>(params.N));
  const auto& norms = lat.norms();

  std::vector<double> vhat(norms.size());
  std::vector<double> rel(norms.size());
  parallel_for(norms.size(), [&](std::size_t c) {
    const double k = two_pi * std::sqrt(static_cast<double>(norms[c]));
    const double ks = k * inv_eN;
    const double vh = fourier_transform_radial(pot, ks);
    const double conv = weighted_hankel(pot, ks, [&](double r) { return tr.w_at(r); });
    vhat[c] = vh;
    // any point of this class carries the same eta
    const double eta = -N * tr.w_hat(k);
    const double lhs = k * k * eta + 0.5 * N * (vh - conv);
    const double rhs = N * mu * RenormPotential::chi_hat(ell * k) + mu / (ell * ell) * eta;
    rel[c] = std::fabs(lhs - rhs) / (0.5 * N * std::fabs(vh));
  });
  for (std::size_t i = 0; i < lat.size(); ++i) {
    out.residual[i] = rel[lat.norm_class(i)];
    out.max_relative = std::max(out.max_relative, out.residual[i]);
  }

  // truncated-lattice form with a tail bound from |eta_q| <= K / q^2
  const double vhat0 = fourier_transform_radial(pot, 0.0);
  const double K = table.sup_p2;
  const double log_span = std::max(0.0, N - std::log(pot.range()) - std::log(lat.cutoff()));
  out.tail_bound = K * (0.5 * vhat0 + pi * mu) * log_span / two_pi / (0.5 * N * vhat0);
  out.truncation_dominated = out.tail_bound > tolerance;

  if (lat.size() > truncated_limit) return out;
  out.truncated_evaluated = true;
  int n_max = 0;
  for (const auto& p : lat.points()) n_max = std::max({n_max, std::abs(p.n1), std::abs(p.n2)});
  const std::int64_t dm_max = 8LL * n_max * n_max;
  std::vector<double> vdiff(static_cast<std::size_t>(dm_max + 1), std::numeric_limits<double>::quiet_NaN());
  const auto r2 = two_square_counts(dm_max);
  std::vector<std::int64_t> dms;
  for (std::int64_t m = 0; m <= dm_max; ++m) {
    if (r2[static_cast<std::size_t>(m)]) dms.push_back(m);
  }
  parallel_for(dms.size(), [&](std::size_t i) {
    vdiff[static_cast<std::size_t>(dms[i])] =
        fourier_transform_radial(pot, two_pi * std::sqrt(static_cast<double>(dms[i])) * inv_eN);
  });

  out.truncated.assign(lat.size(), 0.0);
  std::vector<double> trel(lat.size());
  parallel_for(lat.size(), [&](std::size_t i) {
    const auto& p = lat[i];
    const double k = p.norm;
    // q = 0 term
    double sv = vdiff[static_cast<std::size_t>(p.m)] * table.eta0;
    double sc = ell * ell * RenormPotential::chi_hat(ell * k) * table.eta0;
    for (std::size_t j = 0; j < lat.size(); ++j) {
      const auto& qp = lat[j];
      const std::int64_t d1 = p.n1 - qp.n1;
      const std::int64_t d2 = p.n2 - qp.n2;
      const std::int64_t dm = d1 * d1 + d2 * d2;
      sv += vdiff[static_cast<std::size_t>(dm)] * table.eta[j];
      sc += ell * ell * RenormPotential::chi_hat(ell * two_pi * std::sqrt(static_cast<double>(dm))) * table.eta[j];
    }
    const double vh = vhat[lat.norm_class(i)];
    const double lhs = k * k * table.eta[i] + 0.5 * N * vh + 0.5 * sv;
    const double rhs = N * mu * RenormPotential::chi_hat(ell * k) + mu / (ell * ell) * sc;
    trel[i] = std::fabs(lhs - rhs) / (0.5 * N * std::fabs(vh));
  });
  out.truncated = trel;
  for (double v : trel) out.max_truncated = std::max(out.max_truncated, v);
  return out;
}

ParsevalReport parseval_check(const EtaTransform& tr, const GPParameters& params) {
  ParsevalReport rep;
  rep.integral = tr.w_sq_integral();
  const double w0 = tr.w_hat(0.0);
  if (rep.integral == 0.0) return rep;
  const double ell = params.ell();
  RadialSumSpec spec;
  spec.F = [&](double k) {
    const double w = tr.w_hat(k);
    return w * w;
  };
  spec.k_split = two_pi * 16.0;
  spec.k_far = std::max(4.0 * spec.k_split, 200.0 / ell);
  spec.max_panel = 0.5 * pi / ell;
  spec.tail = [&](double k_far) {
    // |w_hat|^2 k^4 averaged over the last oscillations, integrated as k^-3
    double acc = 0.0;
    const int n = 64;
    for (int i = 0; i < n; ++i) {
      const double k = k_far * (1.0 - 0.1 * i / n);
      const double v = tr.w_hat(k) * k * k;
      acc += v * v;
    }
    return acc / n / (4.0 * pi * k_far * k_far);
  };
  const auto s = radial_lattice_sum(spec);
  rep.lattice_sum = s.total + w0 * w0;
  rep.relative = std::fabs(rep.lattice_sum / rep.integral - 1.0);
  return rep;
}

void write_kernel_csv(std::ostream& out, const KernelTable& table, const RenormPotential& renorm) {
  out << "n1,n2,p,eta_p,omega_p\n";
  out.precision(17);
  for (std::size_t i = 0; i < table.lattice.size(); ++i) {
    const auto& p = table.lattice[i];
    const double w = i < renorm.omega.size() ? renorm.omega[i] : 0.0;
    out << p.n1 << ',' << p.n2 << ',' << p.norm << ',' << table.eta[i] << ',' << w << '\n';
  }
}

}  // namespace gp2d
