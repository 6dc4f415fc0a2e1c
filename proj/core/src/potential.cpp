#include "gp2d/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gp2d/bessel.hpp"
#include "gp2d/error.hpp"
#include "quadrature.hpp"

namespace gp2d {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (trim(s.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::invalid_input, "cannot parse " + what + " from '" + s + "'");
}

}  // namespace

RadialPotential RadialPotential::step(double v0, double b) {
  if (!(v0 >= 0.0) || !std::isfinite(v0)) throw Error(ErrorKind::invalid_input, "step strength must be finite and non-negative");
  if (!(b > 0.0) || !std::isfinite(b)) throw Error(ErrorKind::invalid_input, "step radius must be positive");
  RadialPotential p;
  p.kind_ = PotentialKind::step;
  p.v0_ = v0;
  p.r0_ = b;
  p.finalize();
  return p;
}

RadialPotential RadialPotential::gaussian_bump(double v0, double r0) {
  if (!(v0 >= 0.0) || !std::isfinite(v0)) throw Error(ErrorKind::invalid_input, "bump strength must be finite and non-negative");
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw Error(ErrorKind::invalid_input, "bump range must be positive");
  RadialPotential p;
  p.kind_ = PotentialKind::gaussian_bump;
  p.v0_ = v0;
  p.r0_ = r0;
  p.finalize();
  return p;
}

RadialPotential RadialPotential::tabulated(std::vector<double> r, std::vector<double> v) {
  if (r.size() != v.size() || r.size() < 2) {
    throw Error(ErrorKind::invalid_input, "tabulated potential needs at least two (r, V) rows");
  }
  if (r.front() != 0.0) {
    // extend constantly down to the origin
    r.insert(r.begin(), 0.0);
    v.insert(v.begin(), v.front());
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!std::isfinite(r[i]) || !std::isfinite(v[i])) throw Error(ErrorKind::invalid_input, "non-finite table entry");
    if (v[i] < 0.0) throw Error(ErrorKind::invalid_input, "potential must be non-negative");
    if (i > 0 && !(r[i] > r[i - 1])) throw Error(ErrorKind::invalid_input, "table radii must be strictly increasing");
  }
  RadialPotential p;
  p.kind_ = PotentialKind::tabulated;
  p.v0_ = *std::max_element(v.begin(), v.end());
  p.r0_ = r.back();
  p.tr_ = std::move(r);
  p.tv_ = std::move(v);
  p.finalize();
  return p;
}

RadialPotential RadialPotential::parse_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool header = false;
  std::vector<double> r;
  std::vector<double> v;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (!header) {
      if (line != "# radial-potential v1") {
        throw Error(ErrorKind::invalid_input, "missing '# radial-potential v1' header");
      }
      header = true;
      continue;
    }
    if (line[0] == '#') continue;
    std::istringstream row(line);
    std::string a;
    std::string b;
    if (!(row >> a >> b)) throw Error(ErrorKind::invalid_input, "malformed table row: " + line);
    r.push_back(parse_double(a, "radius"));
    v.push_back(parse_double(b, "potential value"));
  }
  if (!header) throw Error(ErrorKind::invalid_input, "empty potential table");
  return tabulated(std::move(r), std::move(v));
}

RadialPotential RadialPotential::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open potential table " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  auto p = parse_table(buf.str());
  p.source_ = "table:" + path;
  return p;
}

RadialPotential RadialPotential::from_spec(const std::string& spec_in) {
  const std::string spec = trim(spec_in);
  if (spec == "zero" || spec == "free") return zero();
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorKind::invalid_input, "potential spec must look like step:V0,b or bump:V0,R0 or table:PATH");
  }
  const std::string kind = trim(spec.substr(0, colon));
  const std::string args = trim(spec.substr(colon + 1));
  if (kind == "table") return from_file(args);
  const auto comma = args.find(',');
  if (comma == std::string::npos) throw Error(ErrorKind::invalid_input, "expected two comma separated numbers in '" + spec + "'");
  const double a = parse_double(trim(args.substr(0, comma)), "strength");
  const double b = parse_double(trim(args.substr(comma + 1)), "range");
  if (kind == "step") return step(a, b);
  if (kind == "bump") return gaussian_bump(a, b);
  throw Error(ErrorKind::invalid_input, "unknown potential kind '" + kind + "'");
}

std::string RadialPotential::spec() const {
  if (!source_.empty()) return source_;
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case PotentialKind::step: out << "step:" << v0_ << "," << r0_; break;
    case PotentialKind::gaussian_bump: out << "bump:" << v0_ << "," << r0_; break;
    case PotentialKind::tabulated: out << "table:<inline " << tr_.size() << " rows>"; break;
  }
  return out.str();
}

double RadialPotential::operator()(double r) const {
  r = std::fabs(r);
  if (r > r0_) return 0.0;
  switch (kind_) {
    case PotentialKind::step:
      return v0_;
    case PotentialKind::gaussian_bump: {
      const double x = r / r0_;
      const double d = 1.0 - x * x;
      if (d <= 0.0) return 0.0;
      return v0_ * std::exp(1.0 - 1.0 / d);
    }
    case PotentialKind::tabulated: {
      const auto it = std::upper_bound(tr_.begin(), tr_.end(), r);
      if (it == tr_.end()) return tv_.back();
      const std::size_t i = static_cast<std::size_t>(it - tr_.begin());
      const double t = (r - tr_[i - 1]) / (tr_[i] - tr_[i - 1]);
      return tv_[i - 1] + t * (tv_[i] - tv_[i - 1]);
    }
  }
  return 0.0;
}

void RadialPotential::finalize() {
  breaks_.clear();
  if (kind_ == PotentialKind::tabulated) {
    breaks_.assign(tr_.begin() + 1, tr_.end());
  } else {
    breaks_.push_back(r0_);
  }
  zero_ = true;
  if (kind_ == PotentialKind::tabulated) {
    for (double x : tv_) zero_ = zero_ && x == 0.0;
  } else {
    zero_ = v0_ == 0.0;
  }
  if (kind_ == PotentialKind::step) {
    const double area = std::numbers::pi * r0_ * r0_;
    l1_ = v0_ * area;
    l2_ = v0_ * std::sqrt(area);
    l3_ = v0_ * std::cbrt(area);
    return;
  }
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  const auto panels = hankel_panels(*this, 0.0, 64);
  for (std::size_t i = 0; i + 1 < panels.size(); ++i) {
    s1 += detail::gl16_panel([&](double r) { return (*this)(r) * r; }, panels[i], panels[i + 1]);
    s2 += detail::gl16_panel([&](double r) { const double v = (*this)(r); return v * v * r; }, panels[i], panels[i + 1]);
    s3 += detail::gl16_panel([&](double r) { const double v = (*this)(r); return v * v * v * r; }, panels[i], panels[i + 1]);
  }
  l1_ = two_pi * s1;
  l2_ = std::sqrt(two_pi * s2);
  l3_ = std::cbrt(two_pi * s3);
}

std::vector<double> hankel_panels(const RadialPotential& pot, double k, int min_panels) {
  const double R0 = pot.range();
  std::vector<double> cuts{0.0, R0};
  for (double b : pot.breakpoints()) {
    if (b > 0.0 && b < R0) cuts.push_back(b);
  }
  const double width = R0 / std::max(1, min_panels);
  for (int i = 1; i < min_panels; ++i) cuts.push_back(i * width);
  if (k > 0.0) {
    const double half = std::numbers::pi / k;
    const auto n = static_cast<long>(R0 / half);
    for (long i = 1; i <= n; ++i) cuts.push_back(i * half);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out;
  for (double c : cuts) {
    if (c > R0) break;
    if (out.empty() || c - out.back() > 1e-13 * R0) out.push_back(c);
  }
  if (out.back() != R0) out.back() = R0;
  return out;
}

double weighted_hankel(const RadialPotential& pot, double k, const std::function<double(double)>& h) {
  if (pot.is_zero()) return 0.0;
  k = std::fabs(k);
  const auto panels = hankel_panels(pot, k);
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i + 1 < panels.size(); ++i) {
    // evaluate V just inside each panel so a jump sits on the panel edge
    const double y = detail::gl16_panel(
        [&](double r) { return pot(r) * h(r) * bessel::j0(k * r) * r; }, panels[i], panels[i + 1]);
    const double t = sum + y;
    comp += std::fabs(sum) >= std::fabs(y) ? (sum - t) + y : (y - t) + sum;
    sum = t;
  }
  const double result = two_pi * (sum + comp);
  if (!std::isfinite(result)) throw Error(ErrorKind::numerical_failure, "non-finite Hankel quadrature");
  return result;
}

double fourier_transform_radial(const RadialPotential& pot, double k) {
  if (pot.is_zero()) return 0.0;
  if (pot.kind() == PotentialKind::step && k == 0.0) {
    return std::numbers::pi * pot.strength() * pot.range() * pot.range();
  }
  return weighted_hankel(pot, k, [](double) { return 1.0; });
}

}  // namespace gp2d
