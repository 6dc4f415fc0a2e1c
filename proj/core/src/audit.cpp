#include "gp2d/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gp2d/error.hpp"
#include "gp2d/lattice.hpp"

namespace gp2d {

using linalg::DenseMatrix;
using linalg::Vector;

namespace {

constexpr double pi = std::numbers::pi;

double spectral_scale(const DenseMatrix& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::solver, "eigensolver failed on the inequality lhs");
  const auto& ev = es.eigenvalues();
  return std::max(std::fabs(ev(0)), std::fabs(ev(ev.size() - 1)));
}

std::vector<double> sector_weights(const FockBasis& basis, const Vector& v) {
  std::vector<double> w(static_cast<std::size_t>(basis.cap()) + 1, 0.0);
  for (std::size_t i = 0; i < basis.dim(); ++i) w[static_cast<std::size_t>(basis.total(i))] += std::norm(v(static_cast<Eigen::Index>(i)));
  return w;
}

}  // namespace

namespace {

// Smallest c in [0, c_max] with c R - L >= -slack on one block; +inf if none.
double block_constant(const DenseMatrix& L, const DenseMatrix& R, double slack, const MinConstantOptions& opts) {
  const auto d = L.rows();
  auto ok = [&](double c) { return linalg::min_eigenvalue(c * R - L) >= -slack; };
  if (ok(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool seeded = false;
  Eigen::LLT<DenseMatrix> llt(R);
  if (llt.info() == Eigen::Success) {
    // R > 0: the sharp constant is the top generalized eigenvalue of (L, R)
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> ges(L, R, Eigen::EigenvaluesOnly);
    if (ges.info() == Eigen::Success) {
      const double kappa = ges.eigenvalues()(d - 1);
      if (kappa > 0.0 && kappa <= opts.c_max) {
        const double a = kappa * (1.0 - 2.0 * opts.rel_tol);
        const double b = kappa * (1.0 + 2.0 * opts.rel_tol);
        if (ok(b)) {
          hi = b;
          lo = ok(a) ? 0.0 : a;
          seeded = true;
        }
      }
    }
  }
  if (!seeded) {
    hi = 1.0;
    while (!ok(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > opts.c_max) return std::numeric_limits<double>::infinity();
    }
  }
  while (hi - lo > opts.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

InequalityReport min_constant(const LinearOperator& lhs, const std::vector<LinearOperator>& rhs, const FockBasis& basis,
                              const std::string& statement, const MinConstantOptions& opts) {
  if (rhs.empty()) throw Error(ErrorKind::invalid_input, "min_constant needs at least one rhs term");
  lhs.check_hermitian(1e-10);
  const auto d = lhs.dim();
  linalg::SparseMatrix Ls = 0.5 * (lhs.matrix + linalg::SparseMatrix(lhs.matrix.adjoint()));
  linalg::SparseMatrix Rs(d, d);
  for (const auto& t : rhs) {
    if (t.dim() != d) throw Error(ErrorKind::size, "rhs term dimension mismatch");
    t.check_hermitian(1e-10);
    Rs += t.matrix;
  }
  Rs = 0.5 * (Rs + linalg::SparseMatrix(Rs.adjoint()));

  InequalityReport rep;
  rep.statement = statement;
  rep.dim = static_cast<std::size_t>(d);
  rep.cap = basis.cap();
  rep.tolerance = opts.psd_tol;

  // both sides are block diagonal on the joint sparsity components, and a
  // block-diagonal matrix is PSD iff each block is
  const auto blocks = linalg::connected_blocks({&Ls, &Rs}, d);
  std::vector<DenseMatrix> Lb;
  std::vector<DenseMatrix> Rb;
  Lb.reserve(blocks.size());
  Rb.reserve(blocks.size());
  rep.scale = 0.0;
  for (const auto& blk : blocks) {
    Lb.push_back(linalg::extract_block(Ls, blk));
    Rb.push_back(linalg::extract_block(Rs, blk));
    rep.scale = std::max(rep.scale, spectral_scale(Lb.back()));
  }
  const double slack = opts.psd_tol * std::max(rep.scale, 1e-300);

  double c = 0.0;
  for (std::size_t k = 0; k < blocks.size(); ++k) c = std::max(c, block_constant(Lb[k], Rb[k], slack, opts));

  auto lowest = [&](double cc, Vector* vec) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto pair = linalg::smallest_eigenpair(cc * Rb[k] - Lb[k]);
      if (pair.value < best) {
        best = pair.value;
        if (vec) {
          vec->setZero(d);
          for (std::size_t i = 0; i < blocks[k].size(); ++i) (*vec)(blocks[k][i]) = pair.vector(static_cast<Eigen::Index>(i));
        }
      }
    }
    return best;
  };

  if (!std::isfinite(c)) {
    rep.unbounded = true;
    rep.constants = {std::numeric_limits<double>::infinity()};
    rep.min_eigenvalue = lowest(opts.c_max, nullptr);
    rep.pass = false;
    rep.note = "no c <= c_max certifies the inequality at this truncation";
    return rep;
  }
  rep.constants = {c};
  Vector extremal;
  rep.min_eigenvalue = lowest(c, &extremal);
  rep.number_profile = sector_weights(basis, extremal);
  rep.pass = rep.min_eigenvalue >= -slack;

  // independent pass: restarted Lanczos on the assembled sparse combination
  const linalg::SparseMatrix comb = c * Rs - Ls;
  try {
    linalg::LanczosOptions lo_opts;
    lo_opts.tol = 1e-9;
    const auto lz = linalg::lanczos_smallest([&](const Vector& v) { return Vector(comb * v); }, d, lo_opts);
    rep.recheck_eigenvalue = lz.value;
    const double agree = std::fabs(lz.value - rep.min_eigenvalue);
    if (agree > 1e-6 * std::max(1.0, rep.scale)) rep.note = "Lanczos recheck differs by " + std::to_string(agree);
  } catch (const Error& e) {
    rep.recheck_eigenvalue = rep.min_eigenvalue;
    rep.note = std::string("Lanczos recheck: ") + e.what();
  }
  return rep;
}

// ---------------------------------------------------------------------------

Partition Partition::smooth() {
  Partition p;
  auto theta = [](double x) {
    const double t = std::clamp(2.0 * (x - 0.5), 0.0, 1.0);
    return 0.5 * pi * (1.0 - smooth_cutoff(t));
  };
  p.f = [theta](double x) { return x >= 1.0 ? 0.0 : std::cos(theta(x)); };
  p.g = [theta](double x) { return x >= 1.0 ? 1.0 : std::sin(theta(x)); };
  double m = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const double x0 = 0.5 + 0.5 * i / n;
    const double x1 = 0.5 + 0.5 * (i + 1) / n;
    m = std::max({m, std::fabs(p.f(x1) - p.f(x0)) / (x1 - x0), std::fabs(p.g(x1) - p.g(x0)) / (x1 - x0)});
  }
  p.derivative_bound = m;
  return p;
}

Partition Partition::trivial() {
  Partition p;
  p.f = [](double) { return 1.0; };
  p.g = [](double) { return 0.0; };
  return p;
}

LocalizationReport localization_check(const LinearOperator& R_eff, const LinearOperator& H_N, const FockBasis& basis,
                                      const Partition& part, int M, bool certify) {
  if (M < 1) throw Error(ErrorKind::invalid_input, "localization scale M must be positive");
  for (int n = 0; n <= basis.cap(); ++n) {
    const double x = static_cast<double>(n) / M;
    const double f = part.f(x);
    const double g = part.g(x);
    if (std::fabs(f * f + g * g - 1.0) > 1e-12) {
      throw Error(ErrorKind::partition_of_unity, "f^2 + g^2 differs from 1 at N_+ = " + std::to_string(n));
    }
  }
  const auto fM = number_function(basis, [&](int n) { return part.f(static_cast<double>(n) / M); }, "f_M").matrix;
  const auto gM = number_function(basis, [&](int n) { return part.g(static_cast<double>(n) / M); }, "g_M").matrix;
  const linalg::SparseMatrix& R = R_eff.matrix;
  auto comm = [](const linalg::SparseMatrix& x, const linalg::SparseMatrix& y) {
    return linalg::SparseMatrix(x * y - y * x);
  };
  const linalg::SparseMatrix theta = 0.5 * (comm(fM, comm(fM, R)) + comm(gM, comm(gM, R)));

  LocalizationReport rep;
  rep.M = M;
  rep.identity_residual = linalg::max_abs(DenseMatrix(R - fM * R * fM - gM * R * gM - theta));
  rep.theta_norm = theta.nonZeros() ? linalg::max_abs(DenseMatrix(theta)) : 0.0;
  if (!certify) return rep;

  const double logN = std::log(static_cast<double>(basis.particles()));
  const auto one = LinearOperator::identity(basis.dim());
  LinearOperator rhs = (logN / (static_cast<double>(M) * M)) * (H_N + one);
  rhs.hermitian = true;
  const LinearOperator th(theta, "Theta_M", true);
  const LinearOperator mth(-theta, "-Theta_M", true);
  rep.plus = min_constant(th, {rhs}, basis, "+Theta_M <= c log N / M^2 (H_N + 1)");
  rep.minus = min_constant(mth, {rhs}, basis, "-Theta_M <= c log N / M^2 (H_N + 1)");
  rep.c_plus = rep.plus.constants.front();
  rep.c_minus = rep.minus.constants.front();
  return rep;
}

// ---------------------------------------------------------------------------

CondensationReport condensation_lower_bound(const LinearOperator& R_eff, const LinearOperator& H_N,
                                            const FockBasis& basis, const RenormPotential& renorm,
                                            const GPParameters& params, double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::invalid_input, "c must be positive");
  CondensationReport rep;
  rep.c = c;
  const int N = basis.particles();
  const double Nd = N;
  const double logN = std::log(Nd);
  const double w0 = renorm.omega0;
  rep.small_N = N < 10;

  // lhs = -(R - 2 pi N - w0/2 N_+ - c/log N H_N), rhs = (log N)^2 N_+^2 / N + 1
  const auto shift = number_function(
      basis, [&](int n) { return 2.0 * pi * Nd + 0.5 * w0 * n; }, "2piN+w0/2 N_+");
  LinearOperator lhs = shift + (c / logN) * H_N - R_eff;
  lhs.hermitian = true;
  lhs.symbol = "-(R_eff - 2piN - w0/2 N_+ - c/logN H_N)";
  const auto rhs = number_function(
      basis, [&](int n) { return logN * logN * n * static_cast<double>(n) / Nd + 1.0; }, "(logN)^2 N_+^2/N + 1");
  rep.inequality = min_constant(lhs, {rhs}, basis, "R_eff >= 2piN + w0/2 N_+ + c/logN H_N - C((logN)^2 N_+^2/N + 1)");
  rep.C = rep.inequality.constants.front();

  if (std::isfinite(rep.C)) {
    LinearOperator lb = shift + (c / logN) * H_N - rep.C * rhs;
    lb.hermitian = true;
    rep.lower_bound = linalg::smallest_eigenpair(lb.matrix).value;
  } else {
    rep.lower_bound = -std::numeric_limits<double>::infinity();
  }

  // completion of the square: |omega(p)|^2 / (4 (1 - mu) p^2) <= omega(0) / 2
  rep.mu = c / logN;
  const auto r2 = two_square_counts(4096);
  rep.scalar_worst = 0.0;
  for (std::int64_t m = 1; m <= 4096; ++m) {
    if (!r2[static_cast<std::size_t>(m)]) continue;
    const double k = 2.0 * pi * std::sqrt(static_cast<double>(m));
    const double wp = renorm.at(k);
    const double v = wp * wp / (4.0 * (1.0 - rep.mu) * k * k);
    if (w0 > 0.0) rep.scalar_worst = std::max(rep.scalar_worst, v / (0.5 * w0));
  }
  rep.scalar_pass = rep.scalar_worst <= 1.0;

  // Riemann-sum comparison over K < |p| <= N^alpha
  const double Na = params.N_alpha();
  rep.riemann_K = 2.0 * pi * 4.0;
  const double K = rep.riemann_K;
  const double q = Na / (2.0 * pi);
  const auto m_hi = static_cast<std::int64_t>(std::floor(q * q));
  if (m_hi <= 4'000'000) {
    const auto cnt = two_square_counts(std::max<std::int64_t>(m_hi, 1));
    double s = 0.0;
    for (std::int64_t m = 1; m <= m_hi; ++m) {
      const int n = cnt[static_cast<std::size_t>(m)];
      if (!n) continue;
      const double k2 = 4.0 * pi * pi * static_cast<double>(m);
      if (k2 > K * K) s += n / k2;
    }
    rep.riemann_sum = 4.0 * pi * pi * s;
  } else {
    rep.riemann_sum = std::numeric_limits<double>::quiet_NaN();
  }
  rep.riemann_integral = 2.0 * pi * std::log((Na + K) / (0.5 * K));

  const auto om = omega_lattice_sum(renorm, params, 2.0 * pi * Na);
  rep.omega_sum = om.S;
  rep.omega_minus_log = om.S - 2.0 * pi * params.alpha * std::log(Nd);
  return rep;
}

GNShapeReport gn_condensation_shape(const LinearOperator& G, const FockBasis& basis, int N, double c_max, int points) {
  if (points < 2) throw Error(ErrorKind::invalid_input, "shape scan needs at least 2 points");
  const linalg::SparseMatrix g = 0.5 * (G.matrix + linalg::SparseMatrix(G.matrix.adjoint()));
  const linalg::SparseMatrix n = number_operator(basis).matrix;
  const auto d = g.rows();
  linalg::SparseMatrix id(d, d);
  id.setIdentity();
  const linalg::SparseMatrix shifted = g - (2.0 * pi * N) * id;

  GNShapeReport rep;
  const auto ground = linalg::smallest_eigenpair(g);
  rep.ground_energy = ground.value;
  rep.ground_depletion = ground.vector.dot(n * ground.vector).real();
  rep.depletion_chain = true;
  for (int i = 0; i < points; ++i) {
    const double c = c_max * i / (points - 1);
    const double C = -linalg::smallest_eigenpair(linalg::SparseMatrix(shifted - c * n)).value;
    rep.front.push_back({c, C});
    if (c > 0.0 && std::isfinite(C)) {
      rep.nonempty_positive = true;
      const double bound = (rep.ground_energy - 2.0 * pi * N + C) / c;
      if (rep.ground_depletion > bound + 1e-9 * std::max(1.0, std::fabs(bound))) rep.depletion_chain = false;
    }
  }
  return rep;
}

double growth_constant(double kappa, double x) {
  if (!(kappa > 0.0)) return 0.0;
  if (!(x > 0.0)) return kappa;
  double lo = 0.0;
  double hi = kappa;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::exp(mid * x) >= kappa ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace gp2d
