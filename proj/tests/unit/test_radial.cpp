#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "gp2d/bessel.hpp"
#include "gp2d/error.hpp"
#include "gp2d/potential.hpp"
#include "gp2d/radial.hpp"

using namespace gp2d;
using std::numbers::pi;

namespace {

// Relative error with an absolute floor, so zeros of J and Y do not blow up.
double rel(double x, double ref) { return std::fabs(x - ref) / std::max(1.0, std::fabs(ref)); }

double closed_form_step_a(double v0, double b) {
  const double kappa = std::sqrt(v0 / 2.0);
  const double x = kappa * b;
  return b * std::exp(-std::cyl_bessel_i(0.0, x) / (x * std::cyl_bessel_i(1.0, x)));
}

}  // namespace

TEST_SUITE("radial_scattering") {

TEST_CASE("bessel functions agree with the standard library") {
  for (double x : {0.05, 0.3, 1.0, 2.404825557695773, 3.7, 7.5, 12.0, 19.9, 24.5, 40.0, 95.0, 310.0}) {
    CAPTURE(x);
    CHECK(rel(bessel::j0(x), std::cyl_bessel_j(0.0, x)) < 1e-12);
    CHECK(rel(bessel::j1(x), std::cyl_bessel_j(1.0, x)) < 1e-12);
    CHECK(rel(bessel::j2(x), std::cyl_bessel_j(2.0, x)) < 1e-12);
    CHECK(rel(bessel::y0(x), std::cyl_neumann(0.0, x)) < 1e-12);
    CHECK(rel(bessel::y1(x), std::cyl_neumann(1.0, x)) < 1e-12);
    if (x < 600) {
      CHECK(bessel::i0(x) == doctest::Approx(std::cyl_bessel_i(0.0, x)).epsilon(1e-12));
      CHECK(bessel::i1(x) == doctest::Approx(std::cyl_bessel_i(1.0, x)).epsilon(1e-12));
      CHECK(bessel::i0_scaled(x) == doctest::Approx(std::exp(-x) * std::cyl_bessel_i(0.0, x)).epsilon(1e-12));
    }
  }
  CHECK(bessel::j0(0.0) == 1.0);
  CHECK(bessel::j1(0.0) == 0.0);
  CHECK(bessel::j1(-2.0) == doctest::Approx(-std::cyl_bessel_j(1.0, 2.0)).epsilon(1e-14));
}

TEST_CASE("scaled I stays finite far beyond overflow of I") {
  const double x = 2000.0;
  // Leading term of the asymptotic series, 1/sqrt(2 pi x) (1 + 1/(8x) + ...).
  const double lead = 1.0 / std::sqrt(2.0 * pi * x);
  CHECK(bessel::i0_scaled(x) == doctest::Approx(lead * (1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x))).epsilon(1e-9));
  CHECK(std::isfinite(bessel::i1_scaled(x)));
}

TEST_CASE("fourier transform of a step is the Airy profile") {
  const auto pot = RadialPotential::step(2.0, 1.0);
  CHECK(fourier_transform_radial(pot, 0.0) == doctest::Approx(pi * 2.0).epsilon(1e-12));
  for (double k : {0.1, 1.0, 3.8317, 10.0, 55.0}) {
    CAPTURE(k);
    const double ref = 2.0 * pi * 2.0 * 1.0 * std::cyl_bessel_j(1.0, k) / k;
    CHECK(std::fabs(fourier_transform_radial(pot, k) - ref) < 1e-11);
  }
  CHECK(fourier_transform_radial(pot, 0.0) == doctest::Approx(pot.l1()).epsilon(1e-12));
}

TEST_CASE("potential specs parse and reject bad input") {
  const auto s = RadialPotential::from_spec("step:2,1");
  CHECK(s(0.5) == 2.0);
  CHECK(s(1.5) == 0.0);
  CHECK(s.range() == 1.0);
  const auto b = RadialPotential::from_spec("bump:3,0.5");
  CHECK(b(0.0) == doctest::Approx(3.0));
  CHECK(b(0.6) == 0.0);
  CHECK_THROWS_AS(RadialPotential::from_spec("spike:1,1"), Error);
  CHECK_THROWS_AS(RadialPotential::from_spec("step:-1,1"), Error);
  CHECK_THROWS_AS(RadialPotential::parse_table("0 1\n1 0\n"), Error);

  const auto t = RadialPotential::parse_table("# radial-potential v1\n0 2\n1 2\n");
  CHECK(t(0.25) == doctest::Approx(2.0));
  CHECK(t.range() == doctest::Approx(1.0));
}

TEST_CASE("scattering length of a step matches the Bessel matching formula") {
  for (auto [v0, b] : {std::pair{0.5, 1.0}, std::pair{2.0, 1.0}, std::pair{50.0, 0.3}}) {
    CAPTURE(v0);
    CAPTURE(b);
    const auto ze = scattering_length(RadialPotential::step(v0, b));
    CHECK(ze.a == doctest::Approx(closed_form_step_a(v0, b)).epsilon(1e-6));
  }
  const auto hard = scattering_length(RadialPotential::step(1e6, 1.0));
  CHECK(hard.a > 0.99);
  CHECK(hard.a < 1.0);
}

TEST_CASE("scattering length does not depend on the fit window") {
  const auto pot = RadialPotential::step(2.0, 1.0);
  ScatteringOptions wide;
  wide.window_lo = 1.5;
  wide.window_hi = 6.0;
  CHECK(scattering_length(pot, wide).a == doctest::Approx(scattering_length(pot).a).epsilon(1e-6));
}

TEST_CASE("free potential has the zero scattering length sentinel") {
  const auto ze = scattering_length(RadialPotential::zero());
  CHECK(ze.free);
  CHECK(ze.a == 0.0);
}

TEST_CASE("neumann ground state of the free problem is the constant") {
  const auto sol = neumann_ground_state(RadialPotential::zero(), 50.0);
  CHECK(sol.lambda == 0.0);
  for (double f : sol.f) CHECK(f == doctest::Approx(1.0));
  const auto rep = validate_neumann_asymptotics(sol, RadialPotential::zero());
  CHECK(rep.e2 == 0.0);
}

TEST_CASE("neumann ground state invariants for a step") {
  const auto pot = RadialPotential::step(2.0, 1.0);
  const auto sol = neumann_ground_state(pot, 1e3);
  CHECK(sol.f.back() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(sol.fp.back()) < 1e-8);
  for (std::size_t i = 0; i < sol.f.size(); ++i) {
    CHECK(sol.f[i] >= -1e-10);
    CHECK(sol.f[i] <= 1.0 + 1e-10);
    if (i > 0 && sol.grid.r[i] >= pot.range()) CHECK(sol.f[i] - sol.f[i - 1] >= -1e-10);
  }
  CHECK(sol.rayleigh == doctest::Approx(sol.lambda).epsilon(1e-6));

  // lambda_R R^2 log(R/a) / 2 -> 1
  const double L = std::log(sol.R / sol.a);
  CHECK(sol.lambda * sol.R * sol.R * L / 2.0 == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("neumann eigenvalue is below the Bessel trial quotient") {
  const auto pot = RadialPotential::step(2.0, 1.0);
  const auto ze = scattering_length(pot);
  for (double R : {1e2, 1e3, 1e4}) {
    CAPTURE(R);
    const auto sol = neumann_ground_state(pot, R);
    const auto oracle = trial_wavenumber(R, ze.a);
    CHECK(sol.lambda <= trial_rayleigh_quotient(pot, ze, oracle) * (1.0 + 1e-9));
  }
}

TEST_CASE("neumann solution exports r, f, w, f'") {
  const auto sol = neumann_ground_state(RadialPotential::step(2.0, 1.0), 20.0);
  std::ostringstream out;
  sol.write_csv(out);
  CHECK(out.str().rfind("r,f,w,fprime", 0) == 0);
}

TEST_CASE("neumann rejects a radius inside the potential") {
  CHECK_THROWS_AS(neumann_ground_state(RadialPotential::step(2.0, 1.0), 0.5), Error);
}

TEST_CASE("trial wavenumber") {
  const double a = 0.1;
  const auto o = trial_wavenumber(1e3 * a, a);
  CHECK(std::fabs(o.dpsi(o.R)) < 1e-10 * std::fabs(o.dpsi(0.5 * o.R)) + 1e-14);

  const double L = std::log(1e4);
  const auto far = trial_wavenumber(1e4 * a, a);
  const double kR2 = far.k * far.k * far.R * far.R;
  const double asym = 2.0 / L * (1.0 + 3.0 / (4.0 * L));
  CHECK(std::fabs(kR2 - asym) < 2.0 / (L * L * L));

  double prev = trial_wavenumber(10.0, a).k;
  for (double R : {20.0, 40.0}) {
    const double k = trial_wavenumber(R, a).k;
    CHECK(k < prev);
    prev = k;
  }
}

}  // TEST_SUITE
