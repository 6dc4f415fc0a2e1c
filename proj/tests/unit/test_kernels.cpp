#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "gp2d/error.hpp"
#include "gp2d/kernels.hpp"
#include "gp2d/lattice.hpp"

using namespace gp2d;
using std::numbers::pi;

TEST_SUITE("torus_kernels") {

TEST_CASE("unit shell") {
  const auto lat = build_lattice(2.0 * pi);
  REQUIRE(lat.size() == 4);
  std::set<std::pair<int, int>> pts;
  for (const auto& p : lat.points()) pts.insert({p.n1, p.n2});
  CHECK(pts == std::set<std::pair<int, int>>{{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
}

TEST_CASE("lattice count agrees with brute force enumeration") {
  for (int r : {1, 2, 5, 11}) {
    CAPTURE(r);
    std::size_t count = 0;
    for (int a = -r; a <= r; ++a)
      for (int b = -r; b <= r; ++b)
        if ((a || b) && a * a + b * b <= r * r) ++count;
    const auto lat = build_lattice(2.0 * pi * r);
    CHECK(lat.size() == count);
    for (std::size_t i = 0; i < lat.size(); ++i) {
      const long j = lat.negative(i);
      REQUIRE(j >= 0);
      CHECK(lat[static_cast<std::size_t>(j)].n1 == -lat[i].n1);
      CHECK(lat[static_cast<std::size_t>(j)].n2 == -lat[i].n2);
      if (i > 0) CHECK(lat[i - 1].m <= lat[i].m);
    }
  }
}

TEST_CASE("cutoff below 2 pi is rejected") {
  try {
    build_lattice(6.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::empty_lattice);
  }
}

TEST_CASE("two square counts") {
  const auto r2 = two_square_counts(25);
  CHECK(r2[0] == 1);
  CHECK(r2[1] == 4);
  CHECK(r2[2] == 4);
  CHECK(r2[3] == 0);
  CHECK(r2[5] == 8);
  CHECK(r2[25] == 12);
}

TEST_CASE("chi_hat of the unit disk") {
  CHECK(RenormPotential::chi_hat(0.0) == doctest::Approx(pi));
  double sup = 0.0;
  for (int i = 1; i < 4000; ++i) sup = std::max(sup, std::fabs(RenormPotential::chi_hat(0.05 * i)));
  CHECK(sup <= pi);
  CHECK(std::fabs(RenormPotential::chi_hat(1e4)) < 1e-3);
}

TEST_CASE("renormalized potential at the origin is pi g") {
  const GPParameters params{12, 3.0, 1.0};
  const auto lat = build_lattice(2.0 * pi * 4);
  const auto rp = renormalized_potential(params, 0.05, params.log_R(), lat);
  CHECK(rp.omega0 == doctest::Approx(pi * rp.g).epsilon(1e-15));
  REQUIRE(rp.omega.size() == lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) {
    CHECK(std::fabs(rp.omega[i]) <= rp.omega0);
    for (std::size_t j = 0; j < i; ++j)
      if (lat.norm_class(i) == lat.norm_class(j)) CHECK(std::fabs(rp.omega[i] - rp.omega[j]) <= 1e-12);
  }
  // g = 2 N^{1 - 2 alpha} e^{2N} lambda with lambda R^2 = mu.
  const double g = 2.0 * std::pow(12.0, 1.0 - 6.0) * std::exp(24.0) * 0.05 / std::exp(2.0 * params.log_R());
  CHECK(rp.g == doctest::Approx(g).epsilon(1e-12));
  CHECK_THROWS_AS(renormalized_potential(params, -1.0, params.log_R(), lat), Error);
}

TEST_CASE("omega lattice sum vanishes with g") {
  const GPParameters params{10, 3.0, 1.0};
  const auto lat = build_lattice(2.0 * pi);
  const auto rp = renormalized_potential(params, 0.0, params.log_R(), lat);
  CHECK(rp.g == 0.0);
  CHECK(omega_lattice_sum(rp, params, 2.0 * pi * params.N_alpha()).S == 0.0);
}

TEST_CASE("omega lattice sum is insensitive to the split radius") {
  const GPParameters params{10, 3.0, 1.0};
  const auto pot = RadialPotential::step(2.0, 1.0);
  const auto sol = kernel_neumann(pot, params);
  const auto rp = renormalized_potential(params, sol.mu, sol.log_R, build_lattice(2.0 * pi));
  const auto om = omega_lattice_sum(rp, params, 2.0 * pi * params.N_alpha());
  CHECK(om.saturated);
  CHECK(om.split_change < 1e-6);
  CHECK(om.minus_log == doctest::Approx(om.S - 2.0 * pi * 3.0 * std::log(10.0)));
}

TEST_CASE("free potential gives vanishing eta") {
  const GPParameters params{8, 3.0, 1.0};
  const auto pot = RadialPotential::zero();
  const auto sol = kernel_neumann(pot, params);
  const EtaTransform tr(sol, params);
  const auto tab = eta_coefficients(tr, params, build_lattice(2.0 * pi * 4));
  for (double e : tab.eta) CHECK(e == 0.0);
  CHECK(tab.eta0 == 0.0);
  CHECK(tab.norm2 == 0.0);
}

TEST_CASE("eta is symmetric and bounded for a step") {
  const GPParameters params{8, 3.0, 1.0};
  const auto pot = RadialPotential::step(2.0, 1.0);
  const auto sol = kernel_neumann(pot, params);
  const EtaTransform tr(sol, params);
  const auto lat = build_lattice(2.0 * pi * 8);
  const auto tab = eta_coefficients(tr, params, lat);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    CHECK(tab.eta[i] == tab.eta[static_cast<std::size_t>(lat.negative(i))]);
    CHECK(std::fabs(tab.eta[i]) * lat[i].norm * lat[i].norm <= tab.sup_p2 * (1.0 + 1e-12));
  }
  CHECK(std::fabs(tab.eta0) <= 10.0 * params.ell() * params.ell());

  const auto pv = parseval_check(tr, params);
  CHECK(pv.relative < 1e-4);

  std::ostringstream csv;
  write_kernel_csv(csv, tab, renormalized_potential(params, sol.mu, sol.log_R, lat));
  CHECK(csv.str().rfind("n1,n2,", 0) == 0);
}

TEST_CASE("momentum scattering identity") {
  const GPParameters params{10, 3.0, 1.0};
  const auto pot = RadialPotential::step(2.0, 1.0);
  const auto sol = kernel_neumann(pot, params);
  const EtaTransform tr(sol, params);
  const auto lat = build_lattice(2.0 * pi * 8);
  const auto tab = eta_coefficients(tr, params, lat);
  const auto rp = renormalized_potential(params, sol.mu, sol.log_R, lat);
  const auto res = scattering_residual(tab, tr, rp, pot, params);
  CHECK(res.max_relative <= 1e-3);
}

TEST_CASE("parameters") {
  const GPParameters p{10, 3.0, 1.0};
  CHECK(p.ell() == doctest::Approx(1e-3));
  CHECK(p.log_R() == doctest::Approx(10.0 - 3.0 * std::log(10.0)));
  CHECK_THROWS_AS((GPParameters{1, 3.0, 1.0}.validate()), Error);
  CHECK_THROWS_AS((GPParameters{10, -3.0, 1.0}.validate()), Error);
  CHECK_THROWS_AS((GPParameters{2, 0.5, 1.0}.validate()), Error);
}

}  // TEST_SUITE
