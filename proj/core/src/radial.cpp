#include "gp2d/radial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "gp2d/bessel.hpp"
#include "gp2d/error.hpp"
#include "quadrature.hpp"

namespace gp2d {
namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 6>;  // f, g = r f', int g^2 ds, int V f^2 r^2/2 ds, int f^2 r^2 ds, int V f r^2 ds

constexpr double rescale_threshold = 1e100;
constexpr double two_pi = 2.0 * std::numbers::pi;

RadialGrid make_grid(const RadialPotential& pot, double R, const RadialOptions& o) {
  RadialGrid grid;
  const double core = std::min(pot.range(), R) / 100.0;
  std::vector<double>& r = grid.r;
  r.push_back(0.0);
  for (int i = 1; i <= o.core_nodes; ++i) r.push_back(core * i / o.core_nodes);
  const double step = std::log(10.0) / o.nodes_per_decade;
  const double log_core = std::log(core);
  const double log_R = std::log(R);
  for (int j = 1;; ++j) {
    const double s = log_core + j * step;
    if (s >= log_R) break;
    r.push_back(std::exp(s));
  }
  for (double b : pot.breakpoints()) {
    if (b > core && b < R) r.push_back(b);
  }
  r.push_back(R);
  std::sort(r.begin(), r.end());
  std::vector<double> out;
  out.reserve(r.size());
  for (double x : r) {
    if (out.empty() || x > out.back() * (1.0 + 1e-12)) out.push_back(x);
  }
  out.back() = R;
  grid.r = std::move(out);
  return grid;
}

struct Trajectory {
  std::vector<double> f;
  std::vector<double> g;
  State end{};
};

// Integrates the radial equation in s = log r with lambda r^2 = mu (r/R)^2.
class RadialIntegrator {
public:
  RadialIntegrator(const RadialPotential& pot, const RadialGrid& grid, double log_R, const RadialOptions& opts)
      : pot_(pot), grid_(grid), log_R_(log_R), opts_(opts) {
    for (double b : pot.breakpoints()) {
      if (b > 0.0 && b < grid.r.back()) breaks_.push_back(b);
    }
  }

  Trajectory run(double mu, bool store) const {
    Trajectory tr;
    const std::size_t n = grid_.r.size();
    if (store) {
      tr.f.assign(n, 0.0);
      tr.g.assign(n, 0.0);
    }
    const double R = grid_.r.back();
    const double r0 = opts_.start_fraction * std::min(pot_.range(), R);
    const double lam = mu * std::exp(-2.0 * log_R_);
    const double kappa2 = 0.5 * pot_(0.0) - lam;
    const double t = 0.25 * kappa2 * r0 * r0;

    State x{};
    x[0] = 1.0 + t + 0.25 * t * t;
    x[1] = 2.0 * t + t * t;
    x[2] = kappa2 * kappa2 * std::pow(r0, 4) / 16.0;
    x[3] = 0.25 * pot_(0.0) * r0 * r0;
    x[4] = 0.5 * r0 * r0;
    x[5] = 0.5 * pot_(0.0) * r0 * r0;

    if (store) {
      tr.f[0] = 1.0;
      tr.g[0] = 0.0;
    }

    double s = std::log(r0);
    double dt = 1e-3;
    double seg_lo = 0.0;
    std::size_t next_break = 0;
    double seg_hi = breaks_.empty() ? R : breaks_[0];

    auto rhs = [&](const State& y, State& dy, double ss) {
      double r = std::exp(ss);
      const double rv = std::clamp(r, std::nextafter(seg_lo, R), std::nextafter(seg_hi, 0.0));
      const double v = pot_(rv);
      const double r2 = r * r;
      const double lr2 = mu * std::exp(2.0 * (ss - log_R_));
      dy[0] = y[1];
      dy[1] = (0.5 * v * r2 - lr2) * y[0];
      dy[2] = y[1] * y[1];
      dy[3] = 0.5 * v * y[0] * y[0] * r2;
      dy[4] = y[0] * y[0] * r2;
      dy[5] = v * y[0] * r2;
    };

    auto make_stepper = [&] {
      return odeint::make_controlled(opts_.atol, opts_.rtol, odeint::runge_kutta_dopri5<State>());
    };
    auto stepper = make_stepper();

    for (std::size_t i = 1; i < n; ++i) {
      const double target_r = grid_.r[i];
      if (target_r <= r0) {
        if (store) {
          tr.f[i] = x[0];
          tr.g[i] = x[1];
        }
        continue;
      }
      const double target = std::log(target_r);
      int fails = 0;
      while (s < target) {
        double h = std::min(dt, target - s);
        const bool clipped = h < dt;
        const double before = dt;
        if (stepper.try_step(rhs, x, s, h) == odeint::success) {
          dt = clipped ? std::max(before, h) : h;
          fails = 0;
        } else {
          dt = h;
          if (++fails > 500 || dt < 1e-14) {
            throw Error(ErrorKind::numerical_failure, "radial integration step size underflow");
          }
        }
        if (target - s < 1e-14 * std::max(1.0, std::fabs(target))) s = target;
      }
      if (!std::isfinite(x[0]) || !std::isfinite(x[1])) {
        throw Error(ErrorKind::numerical_failure, "radial integration produced non-finite values");
      }
      if (std::fabs(x[0]) > rescale_threshold) {
        const double c = 1.0 / rescale_threshold;
        x[0] *= c;
        x[1] *= c;
        x[2] *= c * c;
        x[3] *= c * c;
        x[4] *= c * c;
        x[5] *= c;
        if (store) {
          for (std::size_t j = 0; j < i; ++j) {
            tr.f[j] *= c;
            tr.g[j] *= c;
          }
        }
        stepper = make_stepper();
      }
      if (store) {
        tr.f[i] = x[0];
        tr.g[i] = x[1];
      }
      if (next_break < breaks_.size() && target_r >= breaks_[next_break]) {
        seg_lo = breaks_[next_break];
        ++next_break;
        seg_hi = next_break < breaks_.size() ? breaks_[next_break] : R;
        stepper = make_stepper();
      }
    }
    tr.end = x;
    return tr;
  }

private:
  const RadialPotential& pot_;
  const RadialGrid& grid_;
  double log_R_;
  RadialOptions opts_;
  std::vector<double> breaks_;
};

}  // namespace

RadialProfile::RadialProfile(std::vector<double> r, std::vector<double> f, std::vector<double> fp)
    : r_(std::move(r)), f_(std::move(f)), fp_(std::move(fp)) {
  if (r_.size() < 2 || r_.size() != f_.size() || r_.size() != fp_.size()) {
    throw Error(ErrorKind::invalid_input, "radial profile needs matching arrays of length >= 2");
  }
}

std::size_t RadialProfile::interval(double r) const {
  if (r <= r_.front()) return 0;
  if (r >= r_.back()) return r_.size() - 2;
  const auto it = std::upper_bound(r_.begin(), r_.end(), r);
  return static_cast<std::size_t>(it - r_.begin()) - 1;
}

double RadialProfile::value(double r) const {
  if (r >= r_.back()) return f_.back();
  const std::size_t i = interval(r);
  const double h = r_[i + 1] - r_[i];
  const double t = (r - r_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f_[i] + (t3 - 2 * t2 + t) * h * fp_[i] + (-2 * t3 + 3 * t2) * f_[i + 1] +
         (t3 - t2) * h * fp_[i + 1];
}

double RadialProfile::derivative(double r) const {
  if (r >= r_.back()) return fp_.back();
  const std::size_t i = interval(r);
  const double h = r_[i + 1] - r_[i];
  const double t = (r - r_[i]) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * f_[i] + (-6 * t2 + 6 * t) * f_[i + 1]) / h + (3 * t2 - 4 * t + 1) * fp_[i] +
         (3 * t2 - 2 * t) * fp_[i + 1];
}

ZeroEnergySolution scattering_length(const RadialPotential& pot, const ScatteringOptions& opts) {
  if (!(opts.window_hi > opts.window_lo) || !(opts.window_lo >= 1.0)) {
    throw Error(ErrorKind::invalid_input, "fit window must satisfy 1 <= lo < hi (units of R0)");
  }
  ZeroEnergySolution ze;
  const double R0 = pot.range();
  ze.window_lo = opts.window_lo * R0;
  ze.window_hi = opts.window_hi * R0;
  ze.grid = make_grid(pot, ze.window_hi, opts.radial);
  const std::size_t n = ze.grid.r.size();

  if (pot.is_zero()) {
    ze.free = true;
    ze.phi.assign(n, 1.0);
    ze.dphi.assign(n, 0.0);
    ze.a = 0.0;
    ze.slope = 0.0;
    ze.intercept = 1.0;
    ze.fit_residual = 0.0;
    return ze;
  }

  RadialIntegrator integ(pot, ze.grid, std::log(ze.window_hi), opts.radial);
  Trajectory tr = integ.run(0.0, true);
  ze.phi = std::move(tr.f);
  ze.dphi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ze.dphi[i] = i == 0 ? 0.0 : tr.g[i] / ze.grid.r[i];
    if (!(ze.phi[i] > 0.0)) {
      throw Error(ErrorKind::internal_consistency, "zero-energy solution crossed zero");
    }
  }

  // least squares phi = A + B log r on the fit window
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ze.grid.r[i];
    if (r <= ze.window_lo * (1.0 + 1e-12) || r > ze.window_hi) continue;
    const double x = std::log(r);
    sx += x;
    sy += ze.phi[i];
    sxx += x * x;
    sxy += x * ze.phi[i];
    ++m;
  }
  if (m < 3) throw Error(ErrorKind::accuracy, "fit window contains fewer than three grid nodes");
  const double xm = sx / m;
  const double ym = sy / m;
  const double B = (sxy - m * xm * ym) / (sxx - m * xm * xm);
  const double A = ym - B * xm;
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ze.grid.r[i];
    if (r <= ze.window_lo * (1.0 + 1e-12) || r > ze.window_hi) continue;
    res = std::max(res, std::fabs(ze.phi[i] - (A + B * std::log(r))) / std::fabs(ze.phi[i]));
  }
  ze.slope = B;
  ze.intercept = A;
  ze.fit_residual = res;
  ze.a = std::exp(-A / B);
  if (res > opts.fit_tolerance) {
    throw Error(ErrorKind::accuracy, "logarithmic fit residual " + std::to_string(res) + " above tolerance");
  }
  return ze;
}

NeumannSolution neumann_ground_state(const RadialPotential& pot, double R, const NeumannOptions& opts) {
  if (!(R > 0.0)) throw Error(ErrorKind::invalid_input, "Neumann radius must be positive");
  return neumann_ground_state_log(pot, std::log(R), opts);
}

NeumannSolution neumann_ground_state_log(const RadialPotential& pot, double log_R, const NeumannOptions& opts) {
  const double R = std::exp(log_R);
  if (!(R > pot.range()) && !opts.allow_core) {
    throw Error(ErrorKind::invalid_input, "Neumann radius must exceed the potential range");
  }
  NeumannSolution sol;
  sol.core_regime = !(R > pot.range());
  for (double b : pot.breakpoints()) {
    if (b > 0.0 && b < R) sol.breakpoints.push_back(b);
  }
  sol.R = R;
  sol.log_R = log_R;
  sol.grid = make_grid(pot, R, opts.radial);
  const std::size_t n = sol.grid.r.size();

  if (pot.is_zero()) {
    sol.free = true;
    sol.f.assign(n, 1.0);
    sol.w.assign(n, 0.0);
    sol.fp.assign(n, 0.0);
    sol.norm2 = 0.5 * R * R;
    return sol;
  }

  ScatteringOptions so;
  so.radial = opts.radial;
  const double a = scattering_length(pot, so).a;
  sol.a = a;
  const double L = log_R - std::log(a);
  if (!(L > 0.0)) throw Error(ErrorKind::invalid_input, "Neumann radius must exceed the scattering length");

  RadialIntegrator integ(pot, sol.grid, log_R, opts.radial);
  auto shoot = [&](double mu) {
    ++sol.shots;
    const State x = integ.run(mu, false).end;
    return x[1] / (std::fabs(x[0]) + std::fabs(x[1]));
  };

  const double span = opts.scan_span / L;
  const double dmu = span / opts.scan_steps;
  double lo = 0.0;
  double f_lo = shoot(0.0);
  double hi = 0.0;
  double f_hi = f_lo;
  bool found = false;
  for (int j = 1; j <= opts.scan_steps; ++j) {
    hi = j * dmu;
    f_hi = shoot(hi);
    if ((f_lo > 0.0) != (f_hi > 0.0) || f_hi == 0.0) {
      found = true;
      break;
    }
    lo = hi;
    f_lo = f_hi;
  }
  if (!found) throw Error(ErrorKind::solver, "no sign change of f'(R) in the eigenvalue scan window");

  double mu = hi;
  if (f_hi != 0.0) {
    std::uintmax_t iters = 200;
    boost::math::tools::eps_tolerance<double> tol(50);
    const auto root = boost::math::tools::toms748_solve(shoot, lo, hi, f_lo, f_hi, tol, iters);
    mu = 0.5 * (root.first + root.second);
  }

  Trajectory tr = integ.run(mu, true);
  const double fR = tr.f.back();
  sol.f.resize(n);
  sol.w.resize(n);
  sol.fp.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.f[i] = tr.f[i] / fR;
    sol.w[i] = 1.0 - sol.f[i];
    sol.fp[i] = i == 0 ? 0.0 : tr.g[i] / fR / sol.grid.r[i];
  }
  for (double v : sol.f) {
    if (v <= 0.0) throw Error(ErrorKind::wrong_branch, "converged Neumann solution has an interior node");
  }
  sol.mu = mu;
  sol.lambda = mu * std::exp(-2.0 * log_R);
  sol.eps = std::sqrt(mu);
  sol.int_vf = two_pi * tr.end[5] / fR;
  sol.rayleigh = (tr.end[2] + tr.end[3]) / tr.end[4];
  sol.norm2 = tr.end[4] / (fR * fR);
  return sol;
}

void NeumannSolution::write_csv(std::ostream& out) const {
  out << "r,f,w,fprime\n";
  out.precision(17);
  for (std::size_t i = 0; i < grid.r.size(); ++i) {
    out << grid.r[i] << ',' << f[i] << ',' << w[i] << ',' << fp[i] << '\n';
  }
}

double TrialOracle::psi(double r) const { return bessel::j0(k * r) - ratio * bessel::y0(k * r); }
double TrialOracle::dpsi(double r) const { return -k * bessel::j1(k * r) + k * ratio * bessel::y1(k * r); }

TrialOracle trial_wavenumber(double R, double a) {
  if (!(R > a) || !(a > 0.0)) throw Error(ErrorKind::invalid_input, "trial wavenumber needs R > a > 0");
  // pole-free form of psi_k'(R) * Y0(k a) / k
  auto F = [&](double x) {
    const double k = x / R;
    return -bessel::j1(x) * bessel::y0(k * a) + bessel::j0(k * a) * bessel::y1(x);
  };
  const int steps = 2000;
  const double x_max = 4.0;
  double lo = x_max / steps;
  double f_lo = F(lo);
  for (int i = 2; i <= steps; ++i) {
    const double hi = x_max * i / steps;
    const double f_hi = F(hi);
    if ((f_lo > 0.0) != (f_hi > 0.0)) {
      std::uintmax_t iters = 200;
      boost::math::tools::eps_tolerance<double> tol(52);
      const auto root = boost::math::tools::toms748_solve(F, lo, hi, f_lo, f_hi, tol, iters);
      TrialOracle o;
      o.R = R;
      o.a = a;
      o.k = 0.5 * (root.first + root.second) / R;
      o.ratio = bessel::j0(o.k * a) / bessel::y0(o.k * a);
      o.euler_gamma = bessel::euler_gamma;
      return o;
    }
    lo = hi;
    f_lo = f_hi;
  }
  throw Error(ErrorKind::root_bracket, "no sign change of the trial derivative for kR in (0, 4]");
}

double trial_rayleigh_quotient(const RadialPotential& pot, const ZeroEnergySolution& ze, const TrialOracle& o) {
  if (ze.free) throw Error(ErrorKind::invalid_input, "trial state undefined for the free potential");
  const double R0 = pot.range();
  const RadialProfile phi = ze.profile();
  const double B = ze.slope;

  // interior |x| < R0 on the zero-energy grid
  double num = 0.0;
  double den = 0.0;
  const auto& r = ze.grid.r;
  for (std::size_t i = 0; i + 1 < r.size() && r[i] < R0; ++i) {
    const double lo = r[i];
    const double hi = std::min(r[i + 1], R0);
    num += detail::gl16_panel(
        [&](double x) {
          const double m = o.a * std::exp(phi.value(x) / B);
          const double dm = m * phi.derivative(x) / B;
          const double Psi = o.psi(m);
          const double dPsi = o.dpsi(m) * dm;
          return (dPsi * dPsi + 0.5 * pot(x) * Psi * Psi) * x;
        },
        lo, hi);
    den += detail::gl16_panel(
        [&](double x) {
          const double Psi = o.psi(o.a * std::exp(phi.value(x) / B));
          return Psi * Psi * x;
        },
        lo, hi);
  }

  // exterior: Lommel integrals, int x Z0^2 = x^2/2 (Z0^2 + Z1^2),
  // int x Z1^2 = x^2/2 (Z1^2 - Z0 Z2)
  auto Z = [&](int n, double x) { return bessel::jn(n, x) - o.ratio * bessel::yn(n, x); };
  auto I0 = [&](double x) {
    const double z0 = Z(0, x), z1 = Z(1, x);
    return 0.5 * x * x * (z0 * z0 + z1 * z1);
  };
  auto I1 = [&](double x) {
    const double z0 = Z(0, x), z1 = Z(1, x), z2 = Z(2, x);
    return 0.5 * x * x * (z1 * z1 - z0 * z2);
  };
  const double k = o.k;
  const double xa = k * R0;
  const double xb = k * o.R;
  den += (I0(xb) - I0(xa)) / (k * k);
  num += I1(xb) - I1(xa);  // |psi'|^2 = k^2 Z1^2, the k^2 cancels the change of variables
  return num / den;
}

AsymptoticsReport validate_neumann_asymptotics(const NeumannSolution& sol, const RadialPotential& pot) {
  AsymptoticsReport rep;
  if (sol.free || pot.is_zero()) {
    rep.L = std::numeric_limits<double>::infinity();
    return rep;
  }
  const double L = sol.log_R - std::log(sol.a);
  rep.L = L;
  rep.e1 = std::fabs(sol.mu - 2.0 / L * (1.0 + 0.75 / L)) * L * L * L / 2.0;
  rep.e2 = std::fabs(sol.int_vf - 4.0 * std::numbers::pi / L) * L * L;
  const double R0 = pot.range();
  const double log_aR = std::log(sol.a) - sol.log_R;
  for (std::size_t i = 0; i < sol.grid.r.size(); ++i) {
    const double r = sol.grid.r[i];
    if (r >= R0 && r < sol.R) {
      const double lr = std::log(r) - sol.log_R;
      if (lr < -1e-12) rep.e3 = std::max(rep.e3, std::fabs(sol.w[i]) * log_aR / lr);
    }
    rep.e4 = std::max(rep.e4, std::fabs(sol.fp[i]) * (r + 1.0) * L);
  }
  rep.e1_finite = std::isfinite(rep.e1);
  rep.e2_finite = std::isfinite(rep.e2);
  rep.e3_finite = std::isfinite(rep.e3);
  rep.e4_finite = std::isfinite(rep.e4);
  return rep;
}

double zero_energy_deviation(const NeumannSolution& sol, const ZeroEnergySolution& ze) {
  if (sol.free) return 0.0;
  const RadialProfile phi = ze.profile();
  const double phi_R = ze.intercept + ze.slope * sol.log_R;
  const double R0_hi = ze.grid.r.back();
  double dev = 0.0;
  for (std::size_t i = 0; i < sol.grid.r.size(); ++i) {
    const double r = sol.grid.r[i];
    if (r > 0.5 * sol.R) break;
    const double p = r <= R0_hi ? phi.value(r) : ze.intercept + ze.slope * std::log(r);
    dev = std::max(dev, std::fabs(sol.f[i] - p / phi_R));
  }
  return dev;
}

}  // namespace gp2d
