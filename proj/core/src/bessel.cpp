#include "gp2d/bessel.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace gp2d::bessel {
namespace {

constexpr double series_limit = 20.0;
constexpr double i_series_limit = 25.0;

long double factorial(int n) {
  long double f = 1.0L;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Piecewise Chebyshev interpolant of J_n on [0, series_limit).
class ChebyshevTable {
public:
  static constexpr int degree = 16;
  static constexpr double width = 1.0;
  static constexpr int segments = static_cast<int>(series_limit / width);

  explicit ChebyshevTable(int order) {
    std::array<long double, degree> samples{};
    for (int s = 0; s < segments; ++s) {
      const long double lo = s * width;
      const long double half = width / 2.0L;
      const long double mid = lo + half;
      for (int k = 0; k < degree; ++k) {
        const long double t = std::cos(std::numbers::pi_v<long double> * (k + 0.5L) / degree);
        samples[k] = detail::jn_series(order, mid + half * t);
      }
      for (int j = 0; j < degree; ++j) {
        long double c = 0.0L;
        for (int k = 0; k < degree; ++k) {
          c += samples[k] * std::cos(std::numbers::pi_v<long double> * j * (k + 0.5L) / degree);
        }
        coeff_[s][j] = static_cast<double>(2.0L * c / degree);
      }
      coeff_[s][0] *= 0.5;
    }
  }

  double operator()(double x) const {
    const int s = static_cast<int>(x / width);
    const double t = (x - (s + 0.5) * width) * (2.0 / width);
    const auto& c = coeff_[s];
    // Clenshaw recurrence
    double b1 = 0.0;
    double b2 = 0.0;
    const double t2 = 2.0 * t;
    for (int j = degree - 1; j >= 1; --j) {
      const double b0 = c[j] + t2 * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    return c[0] + t * b1 - b2;
  }

private:
  std::array<std::array<double, degree>, segments> coeff_{};
};

const ChebyshevTable& j0_table() {
  static const ChebyshevTable table(0);
  return table;
}

const ChebyshevTable& j1_table() {
  static const ChebyshevTable table(1);
  return table;
}

}  // namespace

namespace detail {

long double jn_series(int n, long double x) {
  const long double h = x / 2.0L;
  const long double q = -h * h;
  long double term = std::pow(h, n) / factorial(n);
  long double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<long double>(k) * (k + n));
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum) && k > 2) break;
  }
  return sum;
}

long double yn_series(int n, long double x) {
  constexpr long double pi = std::numbers::pi_v<long double>;
  const long double h = x / 2.0L;
  const long double q = h * h;

  long double finite = 0.0L;
  for (int k = 0; k < n; ++k) {
    finite += factorial(n - k - 1) / factorial(k) * std::pow(q, k);
  }
  finite *= -std::pow(h, -n) / pi;

  // psi(k+1) + psi(n+k+1), with psi(1) = -gamma and psi(m+1) = psi(m) + 1/m
  long double psi_k = -static_cast<long double>(euler_gamma);
  long double psi_nk = psi_k;
  for (int m = 1; m <= n; ++m) psi_nk += 1.0L / m;

  long double term = 1.0L / factorial(n);
  long double sum = term * (psi_k + psi_nk);
  for (int k = 1; k < 500; ++k) {
    term *= -q / (static_cast<long double>(k) * (k + n));
    psi_k += 1.0L / k;
    psi_nk += 1.0L / (k + n);
    const long double t = term * (psi_k + psi_nk);
    sum += t;
    if (std::fabs(t) < 1e-22L * std::fabs(sum) && k > 2) break;
  }
  const long double log_part = 2.0L / pi * std::log(h) * jn_series(n, x);
  return finite + log_part - std::pow(h, n) / pi * sum;
}

long double in_series(int n, long double x) {
  const long double h = x / 2.0L;
  const long double q = h * h;
  long double term = std::pow(h, n) / factorial(n);
  long double sum = term;
  for (int k = 1; k < 2000; ++k) {
    term *= q / (static_cast<long double>(k) * (k + n));
    sum += term;
    if (term < 1e-22L * sum) break;
  }
  return sum;
}

void hankel_asymptotic(int n, double x, double& j, double& y) {
  const double mu = 4.0 * n * n;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * x);
    const double mag = std::fabs(term);
    if (mag > prev) break;
    prev = mag;
    // sign pattern: k = 1 -> +Q, 2 -> -P, 3 -> -Q, 4 -> +P, ...
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      case 0: p += term; break;
    }
    if (mag < 1e-17) break;
  }
  const double chi = x - (0.5 * n + 0.25) * std::numbers::pi;
  const double amp = std::sqrt(2.0 / (std::numbers::pi * x));
  const double c = std::cos(chi);
  const double s = std::sin(chi);
  j = amp * (p * c - q * s);
  y = amp * (p * s + q * c);
}

double in_scaled_asymptotic(int n, double x) {
  const double mu = 4.0 * n * n;
  double sum = 1.0;
  double term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (k * 8.0 * x);
    const double mag = std::fabs(term);
    if (mag > prev) break;
    prev = mag;
    sum += term;
    if (mag < 1e-17) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

}  // namespace detail

double j0(double x) {
  x = std::fabs(x);
  if (x < series_limit) return j0_table()(x);
  double j = 0.0;
  double y = 0.0;
  detail::hankel_asymptotic(0, x, j, y);
  return j;
}

double j1(double x) {
  const double sign = x < 0.0 ? -1.0 : 1.0;
  x = std::fabs(x);
  if (x < 1e-3) return sign * 0.5 * x * (1.0 - x * x / 8.0 * (1.0 - x * x / 24.0));
  if (x < series_limit) return sign * j1_table()(x);
  double j = 0.0;
  double y = 0.0;
  detail::hankel_asymptotic(1, x, j, y);
  return sign * j;
}

double j2(double x) {
  x = std::fabs(x);
  if (x < series_limit) return static_cast<double>(detail::jn_series(2, x));
  double j = 0.0;
  double y = 0.0;
  detail::hankel_asymptotic(2, x, j, y);
  return j;
}

double yn(int n, double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (x < series_limit) return static_cast<double>(detail::yn_series(n, x));
  double j = 0.0;
  double y = 0.0;
  detail::hankel_asymptotic(n, x, j, y);
  return y;
}

double y0(double x) { return yn(0, x); }
double y1(double x) { return yn(1, x); }
double y2(double x) { return yn(2, x); }

double jn(int n, double x) {
  switch (n) {
    case 0: return j0(x);
    case 1: return j1(x);
    case 2: return j2(x);
    default: break;
  }
  const double sign = (x < 0.0 && (n % 2 != 0)) ? -1.0 : 1.0;
  x = std::fabs(x);
  if (x < series_limit) return sign * static_cast<double>(detail::jn_series(n, x));
  double j = 0.0;
  double y = 0.0;
  detail::hankel_asymptotic(n, x, j, y);
  return sign * j;
}

double in(int n, double x) {
  const double sign = (x < 0.0 && (n % 2 != 0)) ? -1.0 : 1.0;
  x = std::fabs(x);
  if (x < i_series_limit) return sign * static_cast<double>(detail::in_series(n, x));
  return sign * std::exp(x) * detail::in_scaled_asymptotic(n, x);
}

double i0(double x) { return in(0, x); }
double i1(double x) { return in(1, x); }

double i0_scaled(double x) {
  x = std::fabs(x);
  if (x < i_series_limit) return static_cast<double>(detail::in_series(0, x) * std::exp(-static_cast<long double>(x)));
  return detail::in_scaled_asymptotic(0, x);
}

double i1_scaled(double x) {
  const double sign = x < 0.0 ? -1.0 : 1.0;
  x = std::fabs(x);
  if (x < i_series_limit) return sign * static_cast<double>(detail::in_series(1, x) * std::exp(-static_cast<long double>(x)));
  return sign * detail::in_scaled_asymptotic(1, x);
}

}  // namespace gp2d::bessel
