#include "gp2d/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "gp2d/error.hpp"

namespace gp2d::linalg {

DenseMatrix expm(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::size, "expm needs a square matrix");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm1)) throw Error(ErrorKind::numerical_failure, "expm of a non-finite matrix");
  int s = 0;
  if (norm1 > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  const DenseMatrix x = a / std::ldexp(1.0, s);

  const DenseMatrix id = DenseMatrix::Identity(n, n);
  const DenseMatrix x2 = x * x;
  const DenseMatrix x4 = x2 * x2;
  const DenseMatrix x6 = x4 * x2;
  DenseMatrix u = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id;
  u = x * u;
  const DenseMatrix v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
  DenseMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

Vector expv(const Apply& a, const Vector& v, double t, double norm_a, const KrylovOptions& opts) {
  Vector w = v;
  const double beta0 = v.norm();
  if (beta0 == 0.0 || t == 0.0 || norm_a == 0.0) return w;
  const int m_max = std::max(2, opts.krylov_dim);
  // substeps keep |tau A| <= 1, where a 30-dimensional Krylov space is far below tol
  const int steps = std::max(1, static_cast<int>(std::ceil(std::fabs(t) * norm_a)));
  if (steps > opts.max_substeps) throw Error(ErrorKind::solver, "expv: too many substeps");
  const double tau = t / steps;
  for (int step = 0; step < steps; ++step) {
    const double beta = w.norm();
    if (beta == 0.0) break;
    const Eigen::Index n = w.size();
    const int m = static_cast<int>(std::min<Eigen::Index>(m_max, n));
    DenseMatrix vk(n, m + 1);
    DenseMatrix h = DenseMatrix::Zero(m + 1, m + 1);
    vk.col(0) = w / beta;
    int used = m;
    for (int j = 0; j < m; ++j) {
      Vector z = a(vk.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const cplx c = vk.col(i).dot(z);
          h(i, j) += c;
          z -= c * vk.col(i);
        }
      }
      const double hn = z.norm();
      h(j + 1, j) = hn;
      if (hn <= 1e-14 * beta) {
        used = j + 1;
        break;
      }
      vk.col(j + 1) = z / hn;
    }
    const DenseMatrix e = expm(tau * h.topLeftCorner(used, used));
    w = beta * (vk.leftCols(used) * e.col(0));
  }
  return w;
}

namespace {

EigenPair from_solver(const Eigen::SelfAdjointEigenSolver<DenseMatrix>& es, const DenseMatrix& h) {
  if (es.info() != Eigen::Success) throw Error(ErrorKind::solver, "dense Hermitian eigensolver failed");
  EigenPair p;
  p.value = es.eigenvalues()(0);
  p.vector = es.eigenvectors().col(0);
  p.residual = (h * p.vector - p.value * p.vector).norm();
  return p;
}

}  // namespace

EigenPair smallest_eigenpair(const DenseMatrix& h) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
  return from_solver(es, h);
}

double min_eigenvalue(const DenseMatrix& h) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::solver, "dense Hermitian eigensolver failed");
  return es.eigenvalues()(0);
}

EigenPair lanczos_smallest(const Apply& h, Eigen::Index dim, const LanczosOptions& opts) {
  if (dim <= 0) throw Error(ErrorKind::size, "Lanczos on an empty space");
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  Vector x(dim);
  for (Eigen::Index i = 0; i < dim; ++i) x(i) = cplx(nd(rng), nd(rng));
  x.normalize();

  const int m = static_cast<int>(std::min<Eigen::Index>(opts.basis, dim));
  EigenPair best;
  for (int restart = 0; restart < opts.max_restarts; ++restart) {
    DenseMatrix q(dim, m);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    q.col(0) = x;
    int k = m;
    for (int j = 0; j < m; ++j) {
      Vector z = h(q.col(j));
      t(j, j) = q.col(j).dot(z).real();
      for (int pass = 0; pass < 2; ++pass) {
        z -= q.leftCols(j + 1) * (q.leftCols(j + 1).adjoint() * z);
      }
      if (j + 1 == m) break;
      const double beta = z.norm();
      if (beta < 1e-13) {
        k = j + 1;
        break;
      }
      t(j, j + 1) = t(j + 1, j) = beta;
      q.col(j + 1) = z / beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.topLeftCorner(k, k));
    const Eigen::VectorXd y = es.eigenvectors().col(0);
    x = q.leftCols(k) * y.cast<cplx>();
    x.normalize();
    const Vector hx = h(x);
    best.value = x.dot(hx).real();
    best.vector = x;
    best.residual = (hx - best.value * x).norm();
    best.iterations = restart + 1;
    if (best.residual <= opts.tol * std::max(1.0, std::fabs(best.value)) || k < m) return best;
  }
  throw Error(ErrorKind::solver, "Lanczos did not converge; residual " + std::to_string(best.residual));
}

std::vector<std::vector<Eigen::Index>> connected_blocks(const std::vector<const SparseMatrix*>& ms, Eigen::Index dim) {
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(dim));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto find = [&](Eigen::Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto* m : ms) {
    if (m->rows() != dim || m->cols() != dim) throw Error(ErrorKind::size, "block partition dimension mismatch");
    for (int k = 0; k < m->outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(*m, k); it; ++it) {
        if (it.value() == cplx(0.0, 0.0)) continue;
        const auto a = find(it.row());
        const auto b = find(it.col());
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::vector<Eigen::Index>> blocks;
  std::vector<long> slot(static_cast<std::size_t>(dim), -1);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(blocks.size());
      blocks.emplace_back();
    }
    blocks[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  return blocks;
}

DenseMatrix extract_block(const SparseMatrix& m, const std::vector<Eigen::Index>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  DenseMatrix out = DenseMatrix::Zero(n, n);
  std::vector<long> pos(static_cast<std::size_t>(m.rows()), -1);
  for (Eigen::Index i = 0; i < n; ++i) pos[idx[i]] = i;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (SparseMatrix::InnerIterator it(m, idx[j]); it; ++it) {
      const long i = pos[it.row()];
      if (i >= 0) out(i, j) = it.value();
    }
  }
  return out;
}

EigenPair smallest_eigenpair(const SparseMatrix& h) {
  if (h.rows() == 0) throw Error(ErrorKind::size, "eigenpair of an empty matrix");
  EigenPair best;
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& blk : connected_blocks({&h}, h.rows())) {
    const auto p = smallest_eigenpair(extract_block(h, blk));
    if (p.value < best.value) {
      best.value = p.value;
      best.vector = Vector::Zero(h.rows());
      for (std::size_t i = 0; i < blk.size(); ++i) best.vector(blk[i]) = p.vector(static_cast<Eigen::Index>(i));
    }
  }
  best.residual = (h * best.vector - best.value * best.vector).norm();
  return best;
}

double hermitian_defect(const DenseMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

double max_abs(const DenseMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace gp2d::linalg
