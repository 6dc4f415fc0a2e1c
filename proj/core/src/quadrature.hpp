#pragma once

#include <array>
#include <boost/math/quadrature/gauss.hpp>

namespace gp2d::detail {

// Full 16-point Gauss-Legendre rule on [-1, 1], unfolded from Boost's
// half-rule tables.
struct GaussLegendre16 {
  std::array<double, 16> x{};
  std::array<double, 16> w{};

  GaussLegendre16() {
    using rule = boost::math::quadrature::gauss<double, 16>;
    const auto& a = rule::abscissa();
    const auto& b = rule::weights();
    for (std::size_t i = 0; i < 8; ++i) {
      x[7 - i] = -a[i];
      w[7 - i] = b[i];
      x[8 + i] = a[i];
      w[8 + i] = b[i];
    }
  }
};

inline const GaussLegendre16& gl16() {
  static const GaussLegendre16 rule;
  return rule;
}

template <class F>
double gl16_panel(F&& f, double a, double b) {
  const auto& q = gl16();
  const double h = 0.5 * (b - a);
  const double m = 0.5 * (b + a);
  double s = 0.0;
  for (int i = 0; i < 16; ++i) s += q.w[i] * f(m + h * q.x[i]);
  return s * h;
}

}  // namespace gp2d::detail
