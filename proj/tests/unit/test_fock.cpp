#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gp2d/error.hpp"
#include "gp2d/fock.hpp"

using namespace gp2d;
using std::numbers::pi;

namespace {

Mode mode(int a, int b) { return {a, b, 2.0 * pi * std::hypot(a, b)}; }

double max_abs(const LinearOperator& x) {
  double m = 0.0;
  for (int k = 0; k < x.matrix.outerSize(); ++k)
    for (linalg::SparseMatrix::InnerIterator it(x.matrix, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

std::vector<double> sorted_spectrum(const LinearOperator& x) {
  Eigen::SelfAdjointEigenSolver<linalg::DenseMatrix> es(x.dense());
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end());
  return v;
}

RenormPotential flat_renorm(double omega0) {
  RenormPotential r;
  r.g = omega0 / pi;
  r.omega0 = omega0;
  r.N_alpha = 1e6;
  return r;
}

}  // namespace

TEST_SUITE("fock_algebra") {

TEST_CASE("basis enumeration") {
  const FockBasis two({mode(1, 0), mode(-1, 0)}, 2);
  REQUIRE(two.dim() == 6);
  const int expect[6][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(two.occupation(i)[0] == expect[i][0]);
    CHECK(two.occupation(i)[1] == expect[i][1]);
    CHECK(two.index(two.occupation(i)) == static_cast<long>(i));
  }
  CHECK(build_basis(shell_modes(4), 1).dim() == 5);
  CHECK(build_basis(shell_modes(4), 3).dim() == 35);
  CHECK(build_basis(shell_modes(8), 1).dim() == 9);
}

TEST_CASE("basis rejects bad mode sets and oversize requests") {
  CHECK_THROWS_AS(FockBasis({mode(1, 0)}, 2), Error);
  CHECK_THROWS_AS(FockBasis({mode(0, 0)}, 2), Error);
  try {
    build_basis(shell_modes(12), 6, -1, 1000);
    FAIL("expected a size error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::size);
  }
  const auto basis = build_basis(shell_modes(4), 2);
  CHECK_THROWS_AS(ladder_at(basis, 3, 3, Ladder::a), Error);
}

TEST_CASE("commutation relations of the modified operators") {
  for (int cap : {1, 2, 3}) {
    CAPTURE(cap);
    const auto basis = build_basis(shell_modes(4), cap);
    for (const auto& c : commutator_checks(basis)) {
      CAPTURE(c.name);
      CHECK(c.pass());
    }
  }
}

TEST_CASE("b_p is dominated by the number operator") {
  const auto basis = build_basis(shell_modes(4), 3);
  const auto n = number_operator(basis);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto xi = FockVector::random(basis, seed);
    const double nn = std::sqrt(xi.amplitudes.dot(n.apply(xi.amplitudes)).real());
    for (int p = 0; p < 4; ++p) CHECK(ladder(basis, p, Ladder::b).apply(xi.amplitudes).norm() <= nn + 1e-12);
  }
}

TEST_CASE("kinetic and potential pieces on the vacuum") {
  const auto basis = build_basis(shell_modes(4), 3);
  const auto pot = RadialPotential::step(2.0, 1.0);
  const auto hp = hamiltonian_pieces(basis, pot);
  CHECK(std::abs(hp.K.matrix.coeff(0, 0)) == 0.0);
  CHECK(std::abs(hp.V_N.matrix.coeff(0, 0)) == 0.0);
  const double N = basis.particles();
  CHECK(hp.L0.matrix.coeff(0, 0).real() == doctest::Approx(0.5 * fourier_transform_radial(pot, 0.0) * (N - 1.0) * N));
  for (const auto* op : {&hp.K, &hp.V_N, &hp.L0, &hp.L2, &hp.L3, &hp.L4}) CHECK(op->hermitian_defect() <= 1e-12);
  CHECK(momentum_conserving(basis, hp.V_N));
  CHECK(momentum_conserving(basis, hp.L));

  for (std::size_t i : {1u, 4u, 7u, 15u, 30u}) {
    double e = 0.0;
    for (std::size_t m = 0; m < basis.mode_count(); ++m) {
      e += basis.modes()[m].norm * basis.modes()[m].norm * basis.occupation(i)[m];
    }
    CHECK(hp.K.matrix.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real() == doctest::Approx(e));
  }
  CHECK(hp.K.matrix.nonZeros() <= static_cast<Eigen::Index>(basis.dim()));
}

TEST_CASE("generators vanish with eta") {
  const auto basis = build_basis(shell_modes(8), 3);
  const auto g = generators(basis, std::vector<double>(basis.mode_count(), 0.0));
  CHECK(max_abs(g.B) == 0.0);
  CHECK(max_abs(g.A) == 0.0);
}

TEST_CASE("generators are antihermitian and B moves two particles") {
  const auto basis = build_basis(shell_modes(8), 3);
  std::vector<double> eta(basis.mode_count());
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = -0.3 / (1.0 + 0.5 * static_cast<double>(i / 2));
  const auto g = generators(basis, eta);
  CHECK(max_abs(g.B + g.B.adjoint()) <= 1e-12);
  CHECK(max_abs(g.A + g.A.adjoint()) <= 1e-12);
  CHECK(max_abs(g.A) > 0.0);

  // [N_+, B]_ij = (n_i - n_j) B_ij
  const auto comm = commutator(number_operator(basis), g.B);
  double worst = 0.0;
  for (int k = 0; k < g.B.matrix.outerSize(); ++k) {
    for (linalg::SparseMatrix::InnerIterator it(g.B.matrix, k); it; ++it) {
      const int d = basis.total(static_cast<std::size_t>(it.row())) - basis.total(static_cast<std::size_t>(it.col()));
      CHECK(std::abs(d) == 2);
      worst = std::max(worst, std::abs(comm.matrix.coeff(it.row(), it.col()) - static_cast<double>(d) * it.value()));
    }
  }
  CHECK(worst <= 1e-12);
  CHECK(comm.matrix.nonZeros() <= g.B.matrix.nonZeros());
}

TEST_CASE("conjugation") {
  const auto basis = build_basis(shell_modes(4), 3);
  const auto pot = RadialPotential::step(2.0, 1.0);
  const auto hp = hamiltonian_pieces(basis, pot);
  std::vector<double> eta(basis.mode_count(), -0.3);
  const auto g = generators(basis, eta);

  SUBCASE("zero generator leaves the operator unchanged") {
    const auto c = conjugate(hp.L, LinearOperator::zero(basis.dim()));
    CHECK(max_abs(c.op - hp.L) <= 1e-12);
  }
  SUBCASE("spectrum is invariant") {
    const auto c = conjugate(hp.L, g.B);
    CHECK(c.dense);
    CHECK(c.unitarity_defect <= 1e-10);
    const auto a = sorted_spectrum(hp.L);
    const auto b = sorted_spectrum(c.op);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-8));
  }
  SUBCASE("Krylov application matches the dense conjugate") {
    const auto dense = conjugate(hp.H, g.B);
    const auto krylov = conjugate(hp.H, g.B, 0);
    CHECK_FALSE(krylov.dense);
    const auto xi = FockVector::random(basis, 7);
    const auto d = dense.op.apply(xi.amplitudes);
    CHECK((krylov.apply(xi.amplitudes) - d).norm() <= 1e-9 * d.norm());
  }
  SUBCASE("e^B is unitary on the truncated space") {
    double defect = 1.0;
    const auto U = unitary_exponential(g.B, &defect);
    CHECK(defect <= 1e-10);
    CHECK(U.rows() == static_cast<Eigen::Index>(basis.dim()));
  }
}

TEST_CASE("remainder d_p vanishes without a generator") {
  const auto basis = build_basis(shell_modes(4), 2);
  const auto d = remainder_dp(basis, LinearOperator::zero(basis.dim()), 0, 0.0);
  CHECK(max_abs(d) <= 1e-14);
}

TEST_CASE("effective hamiltonians on the vacuum") {
  const auto basis = build_basis(shell_modes(4), 3);
  const auto pot = RadialPotential::step(2.0, 1.0);
  const auto hp = hamiltonian_pieces(basis, pot);
  const auto rp = flat_renorm(4.0 * pi * 1.2);
  const auto eff = effective_hamiltonians(basis, rp, hp, pot);
  const double vac = 0.5 * rp.omega0 * (basis.particles() - 1);
  CHECK(eff.G_eff.matrix.coeff(0, 0).real() == doctest::Approx(vac).epsilon(1e-12));
  CHECK(eff.R_eff.matrix.coeff(0, 0).real() == doctest::Approx(vac).epsilon(1e-12));
  CHECK(eff.G_eff.hermitian_defect() <= 1e-12);
  CHECK(eff.R_eff.hermitian_defect() <= 1e-12);
}

TEST_CASE("free effective hamiltonian is the kinetic energy") {
  const auto basis = build_basis(shell_modes(4), 3);
  const auto pot = RadialPotential::zero();
  const auto hp = hamiltonian_pieces(basis, pot);
  const auto eff = effective_hamiltonians(basis, flat_renorm(0.0), hp, pot);
  CHECK(max_abs(eff.R_eff - hp.K) <= 1e-12);
}

TEST_CASE("excitation map rules") {
  for (int N : {1, 2, 3}) {
    CAPTURE(N);
    const auto rep = unitary_excitation_map(shell_modes(4), N);
    REQUIRE_FALSE(rep.skipped);
    CHECK(rep.max_residual() <= 1e-12);
    CHECK(rep.fock_dim == build_basis(shell_modes(4), N).dim());
  }
}

TEST_CASE("operator triplet export") {
  const auto basis = build_basis(shell_modes(4), 1);
  std::ostringstream out;
  number_operator(basis).write_triplets(out);
  CHECK(out.str().find("5") != std::string::npos);
}

}  // TEST_SUITE
