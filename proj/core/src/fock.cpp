#include "gp2d/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>

#include "gp2d/error.hpp"

namespace gp2d {

using linalg::cplx;
using linalg::DenseMatrix;
using linalg::SparseMatrix;
using linalg::Vector;
using Triplet = Eigen::Triplet<cplx>;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

Mode make_mode(int n1, int n2) { return {n1, n2, two_pi * std::sqrt(static_cast<double>(n1 * n1 + n2 * n2))}; }

}  // namespace

std::vector<Mode> shell_modes(int count) {
  std::vector<Mode> m{make_mode(1, 0), make_mode(-1, 0), make_mode(0, 1), make_mode(0, -1)};
  if (count == 4) return m;
  for (auto [a, b] : {std::pair{1, 1}, {-1, -1}, {1, -1}, {-1, 1}}) m.push_back(make_mode(a, b));
  if (count == 8) return m;
  for (auto [a, b] : {std::pair{2, 0}, {-2, 0}, {0, 2}, {0, -2}}) m.push_back(make_mode(a, b));
  if (count == 12) return m;
  throw Error(ErrorKind::invalid_input, "mode shell must have 4, 8 or 12 points");
}

// ---------------------------------------------------------------------------
// basis

FockBasis::FockBasis(std::vector<Mode> modes, int cap, int particles, std::size_t max_dim)
    : modes_(std::move(modes)), cap_(cap), particles_(particles < 0 ? cap : particles) {
  if (modes_.empty()) throw Error(ErrorKind::invalid_input, "Fock basis needs at least one mode");
  if (cap < 1) throw Error(ErrorKind::invalid_input, "particle cap must be at least 1");
  if (cap_ > particles_) throw Error(ErrorKind::invalid_input, "particle cap cannot exceed N");
  if (modes_.size() > 16) throw Error(ErrorKind::size, "at most 16 modes");
  if (cap_ > 255) throw Error(ErrorKind::size, "particle cap above 255");
  const double bits = static_cast<double>(modes_.size()) * std::log2(cap_ + 1.0);
  if (bits >= 63.0) throw Error(ErrorKind::size, "occupation key does not fit 64 bits");

  neg_.resize(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    neg_[i] = mode_index(-modes_[i].n1, -modes_[i].n2);
    if (neg_[i] < 0) throw Error(ErrorKind::invalid_input, "mode set is not closed under negation");
    for (std::size_t j = 0; j < i; ++j) {
      if (modes_[j].n1 == modes_[i].n1 && modes_[j].n2 == modes_[i].n2) {
        throw Error(ErrorKind::invalid_input, "duplicate mode");
      }
    }
    if (modes_[i].n1 == 0 && modes_[i].n2 == 0) throw Error(ErrorKind::invalid_input, "zero momentum is not an excitation mode");
  }

  // count first: sum_k C(k + M - 1, M - 1)
  const std::size_t M = modes_.size();
  double count = 0.0;
  for (int k = 0; k <= cap_; ++k) {
    double c = 1.0;
    for (std::size_t j = 1; j < M; ++j) c = c * static_cast<double>(k + j) / static_cast<double>(j);
    count += c;
  }
  if (count > static_cast<double>(max_dim)) {
    throw Error(ErrorKind::size, "Fock dimension " + std::to_string(static_cast<long long>(count)) +
                                     " exceeds the cap " + std::to_string(max_dim));
  }

  std::vector<std::uint8_t> cur(M, 0);
  std::function<void(std::size_t, int, int)> fill = [&](std::size_t pos, int remaining, int total) {
    if (pos + 1 == M) {
      cur[pos] = static_cast<std::uint8_t>(remaining);
      occ_.insert(occ_.end(), cur.begin(), cur.end());
      totals_.push_back(total);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      cur[pos] = static_cast<std::uint8_t>(v);
      fill(pos + 1, remaining - v, total);
    }
  };
  for (int k = 0; k <= cap_; ++k) fill(0, k, k);
  lookup_.reserve(totals_.size() * 2);
  for (std::size_t i = 0; i < totals_.size(); ++i) lookup_[key(occupation(i))] = i;
}

std::uint64_t FockBasis::key(const std::uint8_t* occ) const {
  std::uint64_t k = 0;
  for (std::size_t j = 0; j < modes_.size(); ++j) k = k * static_cast<std::uint64_t>(cap_ + 1) + occ[j];
  return k;
}

long FockBasis::index(const std::uint8_t* occ) const {
  int t = 0;
  for (std::size_t j = 0; j < modes_.size(); ++j) t += occ[j];
  if (t > cap_) return -1;
  const auto it = lookup_.find(key(occ));
  return it == lookup_.end() ? -1 : static_cast<long>(it->second);
}

int FockBasis::mode_index(int n1, int n2) const {
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i].n1 == n1 && modes_[i].n2 == n2) return static_cast<int>(i);
  }
  return -1;
}

int FockBasis::sum_mode(int a, int b) const {
  const auto& x = modes_[static_cast<std::size_t>(a)];
  const auto& y = modes_[static_cast<std::size_t>(b)];
  return mode_index(x.n1 + y.n1, x.n2 + y.n2);
}

FockBasis build_basis(const std::vector<Mode>& modes, int cap, int particles, std::size_t max_dim) {
  return FockBasis(modes, cap, particles, max_dim);
}

// ---------------------------------------------------------------------------
// operators

LinearOperator::LinearOperator(SparseMatrix m, std::string sym, bool herm)
    : matrix(std::move(m)), symbol(std::move(sym)), hermitian(herm) {
  matrix.makeCompressed();
}

LinearOperator LinearOperator::from_dense(const DenseMatrix& m, std::string sym, bool herm) {
  return {m.sparseView(1.0, 0.0), std::move(sym), herm};
}

LinearOperator LinearOperator::identity(std::size_t dim, std::string sym) {
  SparseMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setIdentity();
  return {std::move(m), std::move(sym), true};
}

LinearOperator LinearOperator::zero(std::size_t dim, std::string sym) {
  return {SparseMatrix(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)), std::move(sym), true};
}

LinearOperator LinearOperator::adjoint() const {
  return {SparseMatrix(matrix.adjoint()), symbol + "^*", hermitian};
}

double LinearOperator::hermitian_defect() const {
  const SparseMatrix d = matrix - SparseMatrix(matrix.adjoint());
  double m = 0.0;
  for (int k = 0; k < d.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

void LinearOperator::check_hermitian(double tol) const {
  if (!hermitian) return;
  const double d = hermitian_defect();
  if (d > tol) {
    throw Error(ErrorKind::internal_consistency,
                "operator " + symbol + " tagged Hermitian has defect " + std::to_string(d));
  }
}

void LinearOperator::write_triplets(std::ostream& out) const {
  out << "# dimension " << dim() << "\n# symbol " << symbol << "\n# hermitian " << (hermitian ? 1 : 0) << '\n';
  out.precision(17);
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
    }
  }
}

LinearOperator operator+(const LinearOperator& x, const LinearOperator& y) {
  return {x.matrix + y.matrix, x.symbol + "+" + y.symbol, x.hermitian && y.hermitian};
}

LinearOperator operator-(const LinearOperator& x, const LinearOperator& y) {
  return {x.matrix - y.matrix, x.symbol + "-" + y.symbol, x.hermitian && y.hermitian};
}

LinearOperator operator*(const LinearOperator& x, const LinearOperator& y) {
  return {SparseMatrix(x.matrix * y.matrix), x.symbol + " " + y.symbol, false};
}

LinearOperator operator*(cplx s, const LinearOperator& x) {
  return {s * x.matrix, x.symbol, x.hermitian && s.imag() == 0.0};
}

LinearOperator commutator(const LinearOperator& x, const LinearOperator& y) {
  return {SparseMatrix(x.matrix * y.matrix - y.matrix * x.matrix), "[" + x.symbol + "," + y.symbol + "]", false};
}

FockVector::FockVector(Vector v) : amplitudes(std::move(v)), norm(amplitudes.norm()) {}

FockVector FockVector::vacuum(const FockBasis& basis) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.dim()));
  v(0) = 1.0;
  return FockVector(std::move(v));
}

FockVector FockVector::random(const FockBasis& basis, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vector v(static_cast<Eigen::Index>(basis.dim()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(nd(rng), nd(rng));
  v.normalize();
  return FockVector(std::move(v));
}

bool FockVector::consistent(double tol) const {
  return amplitudes.allFinite() && std::fabs(amplitudes.norm() - norm) <= tol * std::max(1.0, norm);
}

// ---------------------------------------------------------------------------
// ladder words

namespace {

// Applies one factor in place. Returns false when the result vanishes.
bool act(const LadderFactor& f, std::uint8_t* occ, int& total, double& c, int cap, int N) {
  auto& n = occ[static_cast<std::size_t>(f.mode)];
  switch (f.kind) {
    case Ladder::a:
      if (n == 0) return false;
      c *= std::sqrt(static_cast<double>(n));
      --n;
      --total;
      return true;
    case Ladder::a_dag:
      if (total + 1 > cap) return false;
      c *= std::sqrt(static_cast<double>(n) + 1.0);
      ++n;
      ++total;
      return true;
    case Ladder::b:
      if (n == 0) return false;
      c *= std::sqrt(static_cast<double>(n));
      --n;
      --total;
      c *= std::sqrt(static_cast<double>(N - total) / N);
      return true;
    case Ladder::b_dag:
      if (total >= N || total + 1 > cap) return false;
      c *= std::sqrt(static_cast<double>(N - total) / N);
      c *= std::sqrt(static_cast<double>(n) + 1.0);
      ++n;
      ++total;
      return true;
  }
  return false;
}

}  // namespace

LinearOperator assemble(const FockBasis& basis, const std::vector<WordTerm>& terms, std::string symbol, bool hermitian) {
  const std::size_t M = basis.mode_count();
  std::vector<Triplet> trip;
  std::vector<std::uint8_t> occ(M);
  for (const auto& t : terms) {
    for (const auto& f : t.word) {
      if (f.mode < 0 || static_cast<std::size_t>(f.mode) >= M) throw Error(ErrorKind::index, "ladder mode out of range");
    }
  }
  for (std::size_t j = 0; j < basis.dim(); ++j) {
    for (const auto& t : terms) {
      std::copy_n(basis.occupation(j), M, occ.begin());
      int total = basis.total(j);
      double c = 1.0;
      bool alive = true;
      for (auto it = t.word.rbegin(); it != t.word.rend() && alive; ++it) {
        alive = act(*it, occ.data(), total, c, basis.cap(), basis.particles());
      }
      if (!alive || c == 0.0) continue;
      const long i = basis.index(occ.data());
      if (i < 0) continue;
      trip.emplace_back(i, static_cast<long>(j), t.coefficient * c);
    }
  }
  const auto d = static_cast<Eigen::Index>(basis.dim());
  SparseMatrix m(d, d);
  m.setFromTriplets(trip.begin(), trip.end());
  m.prune(cplx(0.0, 0.0));
  return {std::move(m), std::move(symbol), hermitian};
}

LinearOperator number_function(const FockBasis& basis, const std::function<double(int)>& g, std::string symbol) {
  const auto d = static_cast<Eigen::Index>(basis.dim());
  std::vector<Triplet> trip;
  trip.reserve(basis.dim());
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    const double v = g(basis.total(i));
    if (v != 0.0) trip.emplace_back(static_cast<long>(i), static_cast<long>(i), v);
  }
  SparseMatrix m(d, d);
  m.setFromTriplets(trip.begin(), trip.end());
  return {std::move(m), std::move(symbol), true};
}

LinearOperator number_operator(const FockBasis& basis) {
  return number_function(basis, [](int n) { return static_cast<double>(n); }, "N_+");
}

LinearOperator ladder(const FockBasis& basis, int mode, Ladder kind) {
  if (mode < 0 || static_cast<std::size_t>(mode) >= basis.mode_count()) throw Error(ErrorKind::index, "mode out of range");
  static const char* names[] = {"a", "a^*", "b", "b^*"};
  const auto& m = basis.modes()[static_cast<std::size_t>(mode)];
  const std::string sym = std::string(names[static_cast<int>(kind)]) + "_(" + std::to_string(m.n1) + "," +
                          std::to_string(m.n2) + ")";
  return assemble(basis, {{1.0, {{kind, mode}}}}, sym, false);
}

LinearOperator ladder_at(const FockBasis& basis, int n1, int n2, Ladder kind) {
  const int m = basis.mode_index(n1, n2);
  if (m < 0) throw Error(ErrorKind::index, "momentum 2pi(" + std::to_string(n1) + "," + std::to_string(n2) + ") is not a mode");
  return ladder(basis, m, kind);
}

// ---------------------------------------------------------------------------
// Hamiltonian

ScaledTransform::ScaledTransform(const RadialPotential& pot, int N) : pot_(&pot), inv_eN_(std::exp(-static_cast<double>(N))) {}

double ScaledTransform::operator()(int n1, int n2) const {
  const long m = static_cast<long>(n1) * n1 + static_cast<long>(n2) * n2;
  const auto it = cache_.find(m);
  if (it != cache_.end()) return it->second;
  const double v = fourier_transform_radial(*pot_, two_pi * std::sqrt(static_cast<double>(m)) * inv_eN_);
  cache_.emplace(m, v);
  return v;
}

namespace {

LadderWord w(std::initializer_list<LadderFactor> f) { return LadderWord(f); }

std::vector<WordTerm> cubic_terms(const FockBasis& basis, const std::function<double(int)>& coef) {
  // sum over p, q with p + q a mode: c(p) [b^*_{p+q} a^*_{-p} a_q + a^*_q a_{-p} b_{p+q}]
  std::vector<WordTerm> t;
  const int M = static_cast<int>(basis.mode_count());
  for (int p = 0; p < M; ++p) {
    const double c = coef(p);
    if (c == 0.0) continue;
    for (int q = 0; q < M; ++q) {
      const int s = basis.sum_mode(p, q);
      if (s < 0) continue;
      const int mp = basis.negative(p);
      t.push_back({c, w({{Ladder::b_dag, s}, {Ladder::a_dag, mp}, {Ladder::a, q}})});
      t.push_back({c, w({{Ladder::a_dag, q}, {Ladder::a, mp}, {Ladder::b, s}})});
    }
  }
  return t;
}

std::vector<WordTerm> pairing_terms(const FockBasis& basis, const std::function<double(int)>& coef) {
  // c(p) [b^*_p b^*_{-p} + b_p b_{-p}]
  std::vector<WordTerm> t;
  for (int p = 0; p < static_cast<int>(basis.mode_count()); ++p) {
    const double c = coef(p);
    if (c == 0.0) continue;
    const int mp = basis.negative(p);
    t.push_back({c, w({{Ladder::b_dag, p}, {Ladder::b_dag, mp}})});
    t.push_back({c, w({{Ladder::b, p}, {Ladder::b, mp}})});
  }
  return t;
}

}  // namespace

HamiltonianPieces hamiltonian_pieces(const FockBasis& basis, const RadialPotential& pot) {
  const int M = static_cast<int>(basis.mode_count());
  const int N = basis.particles();
  const double Nd = N;
  const ScaledTransform vhat(pot, N);
  const double v0 = vhat(0, 0);
  const auto& modes = basis.modes();

  HamiltonianPieces h;
  std::vector<WordTerm> kin;
  for (int p = 0; p < M; ++p) {
    const double p2 = modes[p].norm * modes[p].norm;
    kin.push_back({p2, w({{Ladder::a_dag, p}, {Ladder::a, p}})});
  }
  h.K = assemble(basis, kin, "K", true);

  std::vector<WordTerm> quart;
  for (int p = 0; p < M; ++p) {
    for (int q = 0; q < M; ++q) {
      for (int m = 0; m < M; ++m) {
        // r = p_m - p; need q + r among the modes
        const int r1 = modes[m].n1 - modes[p].n1;
        const int r2 = modes[m].n2 - modes[p].n2;
        const int j = basis.mode_index(modes[q].n1 + r1, modes[q].n2 + r2);
        if (j < 0) continue;
        quart.push_back({0.5 * vhat(r1, r2), w({{Ladder::a_dag, m}, {Ladder::a_dag, q}, {Ladder::a, p}, {Ladder::a, j}})});
      }
    }
  }
  h.V_N = assemble(basis, quart, "V_N", true);

  h.L0 = number_function(
      basis, [&](int n) { return 0.5 * v0 * (Nd - 1.0) * (Nd - n) + 0.5 * v0 * n * (Nd - n); }, "L0");

  std::vector<WordTerm> quad = kin;
  for (int p = 0; p < M; ++p) {
    const double v = vhat(modes[p].n1, modes[p].n2);
    quad.push_back({Nd * v, w({{Ladder::b_dag, p}, {Ladder::b, p}})});
    quad.push_back({-v, w({{Ladder::a_dag, p}, {Ladder::a, p}})});
  }
  auto pair = pairing_terms(basis, [&](int p) { return 0.5 * Nd * vhat(modes[p].n1, modes[p].n2); });
  quad.insert(quad.end(), pair.begin(), pair.end());
  h.L2 = assemble(basis, quad, "L2", true);

  h.L3 = assemble(basis, cubic_terms(basis, [&](int p) { return std::sqrt(Nd) * vhat(modes[p].n1, modes[p].n2); }),
                  "L3", true);
  h.L4 = h.V_N;
  h.L4.symbol = "L4";
  h.H = h.K + h.V_N;
  h.H.symbol = "H_N";
  h.L = h.L0 + h.L2 + h.L3 + h.L4;
  h.L.symbol = "L_N";
  return h;
}

bool momentum_conserving(const FockBasis& basis, const LinearOperator& op) {
  auto momentum = [&](std::size_t i) {
    const auto* occ = basis.occupation(i);
    long m1 = 0;
    long m2 = 0;
    for (std::size_t j = 0; j < basis.mode_count(); ++j) {
      m1 += static_cast<long>(occ[j]) * basis.modes()[j].n1;
      m2 += static_cast<long>(occ[j]) * basis.modes()[j].n2;
    }
    return std::pair{m1, m2};
  };
  for (int k = 0; k < op.matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(op.matrix, k); it; ++it) {
      if (it.value() == cplx(0.0, 0.0)) continue;
      if (momentum(static_cast<std::size_t>(it.row())) != momentum(static_cast<std::size_t>(it.col()))) return false;
    }
  }
  return true;
}

std::vector<double> eta_for_modes(const FockBasis& basis, const KernelTable& table) {
  std::vector<double> e;
  for (const auto& m : basis.modes()) {
    const long i = table.lattice.index(m.n1, m.n2);
    if (i < 0) throw Error(ErrorKind::index, "mode outside the kernel lattice");
    e.push_back(table.eta[static_cast<std::size_t>(i)]);
  }
  return e;
}

Generators generators(const FockBasis& basis, const std::vector<double>& eta) {
  const int M = static_cast<int>(basis.mode_count());
  if (eta.size() != basis.mode_count()) throw Error(ErrorKind::size, "one eta per mode required");
  std::vector<WordTerm> b;
  for (int p = 0; p < M; ++p) {
    if (eta[p] == 0.0) continue;
    const int mp = basis.negative(p);
    b.push_back({0.5 * eta[p], w({{Ladder::b_dag, p}, {Ladder::b_dag, mp}})});
    b.push_back({-0.5 * eta[p], w({{Ladder::b, p}, {Ladder::b, mp}})});
  }
  std::vector<WordTerm> a;
  const double s = 1.0 / std::sqrt(static_cast<double>(basis.particles()));
  for (int r = 0; r < M; ++r) {
    if (eta[r] == 0.0) continue;
    for (int v = 0; v < M; ++v) {
      const int rv = basis.sum_mode(r, v);
      if (rv < 0) continue;
      const int mr = basis.negative(r);
      a.push_back({s * eta[r], w({{Ladder::b_dag, rv}, {Ladder::a_dag, mr}, {Ladder::a, v}})});
      a.push_back({-s * eta[r], w({{Ladder::a_dag, v}, {Ladder::a, mr}, {Ladder::b, rv}})});
    }
  }
  return {assemble(basis, b, "B", false), assemble(basis, a, "A", false)};
}

// ---------------------------------------------------------------------------
// conjugation

namespace {

double norm1(const SparseMatrix& m) {
  double best = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

DenseMatrix unitary_exponential(const LinearOperator& gen, double* defect) {
  const auto d = gen.dim();
  DenseMatrix u = DenseMatrix::Zero(d, d);
  double worst = 0.0;
  for (const auto& blk : linalg::connected_blocks({&gen.matrix}, d)) {
    const auto n = static_cast<Eigen::Index>(blk.size());
    const DenseMatrix ub = linalg::expm(linalg::extract_block(gen.matrix, blk));
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) u(blk[i], blk[j]) = ub(i, j);
    }
    if (defect) worst = std::max(worst, linalg::max_abs(ub.adjoint() * ub - DenseMatrix::Identity(n, n)));
  }
  if (defect) *defect = worst;
  return u;
}

Conjugation conjugate(const LinearOperator& op, const LinearOperator& gen, std::size_t dense_cap) {
  if (op.dim() != gen.dim()) throw Error(ErrorKind::size, "conjugation dimension mismatch");
  if (gen.matrix.nonZeros() > 0) {
    const SparseMatrix s = gen.matrix + SparseMatrix(gen.matrix.adjoint());
    double m = 0.0;
    for (int k = 0; k < s.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(s, k); it; ++it) m = std::max(m, std::abs(it.value()));
    }
    if (m > 1e-12) throw Error(ErrorKind::invalid_input, "conjugating generator is not antihermitian");
  }
  Conjugation c;
  const std::string sym = "e^-" + gen.symbol + " " + op.symbol + " e^" + gen.symbol;
  // e^G is block diagonal on the components of G, so blocks shared with op
  // can be exponentiated and conjugated one at a time
  const auto blocks = linalg::connected_blocks({&gen.matrix, &op.matrix}, op.dim());
  std::size_t largest = 0;
  for (const auto& b : blocks) largest = std::max(largest, b.size());
  if (largest <= dense_cap) {
    double defect = 0.0;
    std::vector<Eigen::Triplet<linalg::cplx>> trip;
    for (const auto& blk : blocks) {
      const auto n = static_cast<Eigen::Index>(blk.size());
      const DenseMatrix u = linalg::expm(linalg::extract_block(gen.matrix, blk));
      defect = std::max(defect, linalg::max_abs(u.adjoint() * u - DenseMatrix::Identity(n, n)));
      DenseMatrix r = u.adjoint() * linalg::extract_block(op.matrix, blk) * u;
      if (op.hermitian) r = 0.5 * (r + r.adjoint()).eval();
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          if (r(i, j) != linalg::cplx(0.0, 0.0)) trip.emplace_back(blk[i], blk[j], r(i, j));
        }
      }
    }
    if (defect > 1e-10) throw Error(ErrorKind::accuracy, "exponential of the generator is not unitary to 1e-10");
    c.dense = true;
    c.unitarity_defect = defect;
    SparseMatrix m(op.dim(), op.dim());
    m.setFromTriplets(trip.begin(), trip.end());
    c.op = LinearOperator(std::move(m), sym, op.hermitian);
    const auto shared = std::make_shared<SparseMatrix>(c.op.matrix);
    c.apply = [shared](const Vector& v) { return Vector(*shared * v); };
    return c;
  }
  c.dense = false;
  const auto g = std::make_shared<SparseMatrix>(gen.matrix);
  const auto x = std::make_shared<SparseMatrix>(op.matrix);
  const double ng = norm1(gen.matrix);
  c.apply = [g, x, ng](const Vector& v) {
    const linalg::Apply ga = [g](const Vector& y) { return Vector(*g * y); };
    const Vector u = linalg::expv(ga, v, 1.0, ng);
    const Vector xu = *x * u;
    return linalg::expv(ga, xu, -1.0, ng);
  };
  c.op.symbol = sym;
  c.op.hermitian = op.hermitian;
  return c;
}

LinearOperator remainder_dp(const FockBasis& basis, const LinearOperator& B, int mode, double eta_p) {
  const auto bp = ladder(basis, mode, Ladder::b);
  const auto bmp_dag = ladder(basis, basis.negative(mode), Ladder::b_dag);
  const auto conj = conjugate(bp, B);
  LinearOperator d = conj.op - std::cosh(eta_p) * bp - std::sinh(eta_p) * bmp_dag;
  d.symbol = "d_p";
  d.hermitian = false;
  return d;
}

// ---------------------------------------------------------------------------
// effective Hamiltonians

EffectiveHamiltonians effective_hamiltonians(const FockBasis& basis, const RenormPotential& renorm,
                                             const HamiltonianPieces& pieces, const RadialPotential& pot) {
  const int M = static_cast<int>(basis.mode_count());
  const double Nd = basis.particles();
  const double w0 = renorm.omega0;
  const ScaledTransform vhat(pot, basis.particles());
  const double v0 = vhat(0, 0);
  const auto& modes = basis.modes();
  std::vector<double> wp(static_cast<std::size_t>(M));
  for (int p = 0; p < M; ++p) wp[p] = renorm.at(modes[p].norm);

  EffectiveHamiltonians e;
  {
    auto diag = number_function(
        basis,
        [&](int n) { return 0.5 * w0 * (Nd - 1.0) * (1.0 - n / Nd) + (2.0 * Nd * v0 - 0.5 * w0) * n * (1.0 - n / Nd); },
        "G0");
    auto pair = assemble(basis, pairing_terms(basis, [&](int p) { return 0.5 * wp[p]; }), "G2", true);
    e.G_eff = diag + pair + pieces.L3 + pieces.H;
    e.G_eff.symbol = "G_eff";
  }
  {
    auto diag = number_function(
        basis,
        [&](int n) {
          return 0.5 * (Nd - 1.0) * w0 * (1.0 - n / Nd) + 0.5 * w0 * n * (1.0 - n / Nd) + w0 * n * (1.0 - n / Nd);
        },
        "R0");
    auto pair = assemble(basis, pairing_terms(basis, [&](int p) { return 0.5 * wp[p]; }), "R2", true);
    auto cubic = assemble(basis, cubic_terms(basis, [&](int p) { return wp[p] / std::sqrt(Nd); }), "R3", true);
    e.R_eff = diag + pair + cubic + pieces.H;
    e.R_eff.symbol = "R_eff";
  }
  return e;
}

// ---------------------------------------------------------------------------
// U_N

double ExcitationMapReport::max_residual() const {
  return std::max({unitarity, zero_number, create_from_zero, annihilate_to_zero, hopping});
}

ExcitationMapReport unitary_excitation_map(const std::vector<Mode>& modes, int N, std::size_t dense_cap) {
  ExcitationMapReport rep;
  if (N < 1) throw Error(ErrorKind::invalid_input, "N must be at least 1");
  const FockBasis fock(modes, N, N);
  // full N-particle space: slot 0 is the zero mode
  std::vector<Mode> all{Mode{0, 0, 0.0}};
  all.insert(all.end(), modes.begin(), modes.end());
  const std::size_t M = all.size();
  std::vector<std::vector<std::uint8_t>> full;
  {
    std::vector<std::uint8_t> cur(M, 0);
    std::function<void(std::size_t, int)> fill = [&](std::size_t pos, int remaining) {
      if (pos + 1 == M) {
        cur[pos] = static_cast<std::uint8_t>(remaining);
        full.push_back(cur);
        return;
      }
      for (int v = remaining; v >= 0; --v) {
        cur[pos] = static_cast<std::uint8_t>(v);
        fill(pos + 1, remaining - v);
      }
    };
    fill(0, N);
  }
  rep.full_dim = full.size();
  rep.fock_dim = fock.dim();
  if (rep.full_dim > dense_cap || rep.fock_dim > dense_cap) {
    rep.skipped = true;
    rep.reason = "dimension above the dense cap";
    return rep;
  }
  std::map<std::vector<std::uint8_t>, std::size_t> full_index;
  for (std::size_t i = 0; i < full.size(); ++i) full_index[full[i]] = i;

  const auto F = static_cast<Eigen::Index>(rep.fock_dim);
  const auto D = static_cast<Eigen::Index>(rep.full_dim);

  // U = sum_n P_+^{(n)} a_0^{N-n} / sqrt((N-n)!) on each basis state
  DenseMatrix U = DenseMatrix::Zero(F, D);
  for (std::size_t s = 0; s < full.size(); ++s) {
    const int n0 = full[s][0];
    for (int n = 0; n <= N; ++n) {
      const int k = N - n;
      if (k > n0) continue;
      double c = 1.0;
      for (int j = 0; j < k; ++j) c *= std::sqrt(static_cast<double>(n0 - j));
      double fact = 1.0;
      for (int j = 2; j <= k; ++j) fact *= j;
      c /= std::sqrt(fact);
      if (n0 - k != 0) continue;  // the projection removes leftover condensate
      const long i = fock.index(full[s].data() + 1);
      if (i < 0) continue;
      U(i, static_cast<Eigen::Index>(s)) += c;
    }
  }
  rep.unitarity = std::max(linalg::max_abs(U * U.adjoint() - DenseMatrix::Identity(F, F)),
                           linalg::max_abs(U.adjoint() * U - DenseMatrix::Identity(D, D)));

  // a^*_i a_j on the full space
  auto hop = [&](std::size_t i, std::size_t j) {
    DenseMatrix m = DenseMatrix::Zero(D, D);
    for (std::size_t s = 0; s < full.size(); ++s) {
      auto occ = full[s];
      if (occ[j] == 0) continue;
      double c = std::sqrt(static_cast<double>(occ[j]));
      --occ[j];
      c *= std::sqrt(static_cast<double>(occ[i]) + 1.0);
      ++occ[i];
      m(static_cast<Eigen::Index>(full_index.at(occ)), static_cast<Eigen::Index>(s)) += c;
    }
    return m;
  };
  auto conj = [&](const DenseMatrix& x) { return DenseMatrix(U * x * U.adjoint()); };

  const auto Nplus = number_operator(fock).dense();
  const DenseMatrix id = DenseMatrix::Identity(F, F);
  const auto sqrt_rest =
      number_function(fock, [&](int n) { return std::sqrt(static_cast<double>(N - n)); }, "sqrt(N-N_+)").dense();
  rep.zero_number = linalg::max_abs(conj(hop(0, 0)) - (static_cast<double>(N) * id - Nplus));
  for (std::size_t p = 0; p < modes.size(); ++p) {
    const auto ap_dag = ladder(fock, static_cast<int>(p), Ladder::a_dag).dense();
    const auto ap = ladder(fock, static_cast<int>(p), Ladder::a).dense();
    rep.create_from_zero = std::max(rep.create_from_zero, linalg::max_abs(conj(hop(p + 1, 0)) - ap_dag * sqrt_rest));
    rep.annihilate_to_zero = std::max(rep.annihilate_to_zero, linalg::max_abs(conj(hop(0, p + 1)) - sqrt_rest * ap));
    for (std::size_t q = 0; q < modes.size(); ++q) {
      const auto fock_hop =
          assemble(fock, {{1.0, {{Ladder::a_dag, static_cast<int>(p)}, {Ladder::a, static_cast<int>(q)}}}}, "hop", false)
              .dense();
      rep.hopping = std::max(rep.hopping, linalg::max_abs(conj(hop(p + 1, q + 1)) - fock_hop));
    }
  }
  return rep;
}

std::vector<AlgebraCheck> commutator_checks(const FockBasis& basis, double tol) {
  const int M = static_cast<int>(basis.mode_count());
  const double Nd = basis.particles();
  std::vector<DenseMatrix> a, ad, b, bd;
  for (int p = 0; p < M; ++p) {
    a.push_back(ladder(basis, p, Ladder::a).dense());
    ad.push_back(ladder(basis, p, Ladder::a_dag).dense());
    b.push_back(ladder(basis, p, Ladder::b).dense());
    bd.push_back(ladder(basis, p, Ladder::b_dag).dense());
  }
  const auto n = number_operator(basis).dense();
  const DenseMatrix id = DenseMatrix::Identity(n.rows(), n.cols());
  auto comm = [](const DenseMatrix& x, const DenseMatrix& y) { return DenseMatrix(x * y - y * x); };

  double bb_dag = 0.0;
  double bb = 0.0;
  double bdbd = 0.0;
  double b_hop = 0.0;
  double bd_hop = 0.0;
  double b_num = 0.0;
  for (int p = 0; p < M; ++p) {
    b_num = std::max(b_num, linalg::max_abs(comm(b[p], n) - b[p]));
    b_num = std::max(b_num, linalg::max_abs(comm(bd[p], n) + bd[p]));
    for (int q = 0; q < M; ++q) {
      DenseMatrix rhs = -(ad[q] * a[p]) / Nd;
      if (p == q) rhs += id - n / Nd;
      bb_dag = std::max(bb_dag, linalg::max_abs(comm(b[p], bd[q]) - rhs));
      bb = std::max(bb, linalg::max_abs(comm(b[p], b[q])));
      bdbd = std::max(bdbd, linalg::max_abs(comm(bd[p], bd[q])));
      for (int r = 0; r < M; ++r) {
        const DenseMatrix h = ad[q] * a[r];
        DenseMatrix e1 = comm(b[p], h);
        if (p == q) e1 -= b[r];
        DenseMatrix e2 = comm(bd[p], h);
        if (p == r) e2 += bd[q];
        b_hop = std::max(b_hop, linalg::max_abs(e1));
        bd_hop = std::max(bd_hop, linalg::max_abs(e2));
      }
    }
  }
  return {{"[b_p,b_q^*] = (1-N_+/N) delta_pq - a_q^* a_p / N", bb_dag, tol},
          {"[b_p,b_q] = 0", bb, tol},
          {"[b_p^*,b_q^*] = 0", bdbd, tol},
          {"[b_p, a_q^* a_r] = delta_pq b_r", b_hop, tol},
          {"[b_p^*, a_q^* a_r] = -delta_pr b_q^*", bd_hop, tol},
          {"[b_p, N_+] = b_p, [b_p^*, N_+] = -b_p^*", b_num, tol}};
}

}  // namespace gp2d
