#pragma once

// Cylinder functions of integer order 0, 1, 2.
//
// Small and moderate arguments use the ascending power series summed in
// long double; large arguments use the Hankel asymptotic expansions. J0 and
// J1 are additionally served from piecewise Chebyshev tables built once from
// the series, since they sit in the inner loop of every Hankel quadrature.

namespace gp2d::bessel {

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

double j0(double x);
double j1(double x);
double j2(double x);
double y0(double x);
double y1(double x);
double y2(double x);
double i0(double x);
double i1(double x);

/// e^{-|x|} I_n(x); finite for every x.
double i0_scaled(double x);
double i1_scaled(double x);

double jn(int n, double x);
double yn(int n, double x);
double in(int n, double x);

namespace detail {
// Reference evaluators used to build the tables and by tests.
long double jn_series(int n, long double x);
long double yn_series(int n, long double x);
long double in_series(int n, long double x);
void hankel_asymptotic(int n, double x, double& j, double& y);
double in_scaled_asymptotic(int n, double x);
}  // namespace detail

}  // namespace gp2d::bessel
