// Acceptance run: one PASS/FAIL line per criterion, with the measured values
// and wall time. A FAIL is reported, never hidden; the exit status is 0 as
// long as every criterion could be evaluated.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gp2d/audit.hpp"
#include "gp2d/cli.hpp"
#include "gp2d/energy.hpp"
#include "gp2d/error.hpp"

using namespace gp2d;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double band(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

// Two constants are "stable" when their ratio is below 2 or both vanish.
bool stable(double a, double b) {
  if (std::fabs(a) <= 1e-12 && std::fabs(b) <= 1e-12) return true;
  if (!(a > 0.0) || !(b > 0.0)) return false;
  return std::max(a, b) / std::min(a, b) < 2.0;
}

double closed_form_step_a(double v0, double b) {
  const double x = std::sqrt(v0 / 2.0) * b;
  return b * std::exp(-std::cyl_bessel_i(0.0, x) / (x * std::cyl_bessel_i(1.0, x)));
}

const RadialPotential& step21() {
  static const auto pot = RadialPotential::step(2.0, 1.0);
  return pot;
}

struct Physics {
  GPParameters params;
  KernelTable table;
  RenormPotential renorm;
};

Physics physics(int N) {
  Physics ph;
  ph.params = GPParameters{N, 3.0, 1.0};
  const auto sol = kernel_neumann(step21(), ph.params);
  const auto lat = build_lattice(2.0 * pi * 16);
  ph.table = eta_coefficients(EtaTransform(sol, ph.params), ph.params, lat);
  ph.renorm = renormalized_potential(ph.params, sol.mu, sol.log_R, lat);
  return ph;
}

// ---------------------------------------------------------------------------

std::vector<AsymptoticsReport> neumann_sweep() {
  std::vector<AsymptoticsReport> out;
  for (double R : {1e3, 1e4, 1e5, 1e6}) {
    out.push_back(validate_neumann_asymptotics(neumann_ground_state(step21(), R), step21()));
  }
  return out;
}

Outcome c1() {
  std::vector<double> e1;
  for (const auto& r : neumann_sweep()) e1.push_back(r.e1);
  const double b = band(e1);
  return {b <= 3.0, "e1 = " + fmt("%.4g", e1.front()) + " .. " + fmt("%.4g", e1.back()) + ", band " + fmt("%.3f", b) +
                        " (<= 3)"};
}

Outcome c2() {
  std::vector<double> e2;
  for (const auto& r : neumann_sweep()) e2.push_back(r.e2);
  const double b = band(e2);
  return {b <= 3.0, "e2 = " + fmt("%.4g", e2.front()) + " .. " + fmt("%.4g", e2.back()) + ", band " + fmt("%.3f", b) +
                        " (<= 3)"};
}

Outcome c3() {
  double worst = 0.0;
  for (auto [v0, b] : {std::pair{0.5, 1.0}, std::pair{2.0, 1.0}, std::pair{50.0, 0.3}}) {
    const double a = scattering_length(RadialPotential::step(v0, b)).a;
    const double ref = closed_form_step_a(v0, b);
    worst = std::max(worst, std::fabs(a - ref) / ref);
  }
  return {worst <= 1e-6, "max relative deviation " + fmt("%.2e", worst) + " (<= 1e-6)"};
}

Outcome c4() {
  const auto lat = build_lattice(2.0 * pi * 16);
  std::vector<double> sup, nrm;
  double res = 0.0;
  for (int N : {8, 10, 12, 14}) {
    const GPParameters params{N, 3.0, 1.0};
    const auto sol = kernel_neumann(step21(), params);
    const EtaTransform tr(sol, params);
    const auto tab = eta_coefficients(tr, params, lat);
    const auto rp = renormalized_potential(params, sol.mu, sol.log_R, lat);
    res = std::max(res, scattering_residual(tab, tr, rp, step21(), params).max_relative);
    sup.push_back(tab.sup_p2);
    nrm.push_back(tab.norm2 * params.N_alpha());
  }
  const double b1 = band(sup);
  const double b2 = band(nrm);
  return {b1 < 2.0 && b2 < 2.0 && res <= 1e-3, "sup |eta_p| p^2 band " + fmt("%.3f", b1) + ", |eta|_2 N^alpha band " +
                                                  fmt("%.3f", b2) + " (< 2), scattering residual " + fmt("%.2e", res) +
                                                  " (<= 1e-3)"};
}

Outcome c5() {
  std::vector<double> dev, sml;
  const auto small = build_lattice(2.0 * pi);
  for (int N : {10, 15, 20, 25, 30, 35, 40}) {
    const GPParameters params{N, 3.0, 1.0};
    const auto sol = kernel_neumann(step21(), params);
    const auto rp = renormalized_potential(params, sol.mu, sol.log_R, small);
    dev.push_back(std::fabs(rp.omega0 - 4.0 * pi * (1.0 + 3.0 * std::log(N) / N)) * N);
    sml.push_back(omega_lattice_sum(rp, params, 2.0 * pi * params.N_alpha()).minus_log);
  }
  const double b = band(dev);
  const auto [lo, hi] = std::minmax_element(sml.begin(), sml.end());
  const double spread = *hi - *lo;
  return {b <= 3.0 && spread <= 10.0, "omega0 deviation band " + fmt("%.3f", b) + " (<= 3), S - 2 pi alpha log N in [" +
                                          fmt("%.2f", *lo) + ", " + fmt("%.2f", *hi) + "], spread " +
                                          fmt("%.2f", spread) + " (<= 10)"};
}

Outcome c6() {
  const int N = 3;
  const auto ph = physics(N);
  const auto basis = build_basis(shell_modes(4), N);
  double worst = 0.0;
  for (const auto& c : commutator_checks(basis, 1e-10)) worst = std::max(worst, c.residual);
  for (int n = 1; n <= N; ++n) worst = std::max(worst, unitary_excitation_map(shell_modes(4), n).max_residual());

  // eta vanishes on the shell at N = 3 (the Neumann ball lies inside the
  // potential), so the generators are also exercised with a synthetic eta.
  for (const auto& eta : {eta_for_modes(basis, ph.table), std::vector<double>(basis.mode_count(), -0.3)}) {
    const auto g = generators(basis, eta);
    for (const auto* op : {&g.B, &g.A}) {
      const auto anti = (*op + op->adjoint()).dense();
      worst = std::max(worst, linalg::max_abs(anti));
      double defect = 0.0;
      unitary_exponential(*op, &defect);
      worst = std::max(worst, defect);
    }
  }
  const auto pieces = hamiltonian_pieces(basis, step21());
  const auto eff = effective_hamiltonians(basis, ph.renorm, pieces, step21());
  const int M = static_cast<int>(std::lround(std::pow(N, 0.8)));
  const auto loc = localization_check(eff.R_eff, pieces.H, basis, Partition::smooth(), M, false);
  worst = std::max(worst, loc.identity_residual);
  return {worst <= 1e-10, "max residual " + fmt("%.2e", worst) + " (<= 1e-10) over commutators, U_N rules, B and A, "
                                                                  "localization identity"};
}

using Builder = std::function<InequalityReport(const FockBasis&)>;

struct Stability {
  int certified = 0;
  int total = 0;
  int stable_pairs = 0;
  int pairs = 0;
  double worst_ratio = 1.0;
  std::vector<std::string> failures;

  void run(const std::string& name, int N, int shell, int cap, const Builder& build) {
    const auto hi = build(FockBasis(shell_modes(shell), cap, N));
    const auto lo = build(FockBasis(shell_modes(shell), cap - 1, N));
    for (const auto* r : {&hi, &lo}) {
      ++total;
      if (r->pass && !r->unbounded && std::isfinite(r->constants.front())) ++certified;
      else failures.push_back(name + " uncertified");
    }
    ++pairs;
    const double a = hi.constants.front();
    const double b = lo.constants.front();
    if (stable(a, b)) {
      ++stable_pairs;
    } else {
      failures.push_back(name + " unstable");
    }
    if (a > 1e-12 && b > 1e-12) worst_ratio = std::max(worst_ratio, std::max(a, b) / std::min(a, b));
  }
};

double localization_kappa(int N, int M) {
  const GPParameters p{N, 3.0, 1.0};
  const auto sol = kernel_neumann(step21(), p);
  const auto rp = renormalized_potential(p, sol.mu, sol.log_R, build_lattice(2.0 * pi * 3));
  const auto modes = shell_modes(4);
  const FockBasis fb({modes[0], modes[1]}, N);
  const auto hp = hamiltonian_pieces(fb, step21());
  const auto eff = effective_hamiltonians(fb, rp, hp, step21());
  const auto rep = localization_check(eff.R_eff, hp.H, fb, Partition::smooth(), M, true);
  return rep.constant() * std::log(static_cast<double>(N)) / (static_cast<double>(M) * M);
}

Outcome c7() {
  Stability st;
  for (int N : {3, 4, 5}) {
    const auto ph = physics(N);
    const std::string tag = "N=" + std::to_string(N);
    for (int n = 1; n <= 3; ++n) {
      st.run(tag + " Ngrow n=" + std::to_string(n), N, 4, N, [&](const FockBasis& fb) {
        const auto rhs = number_function(fb, [n](int k) { return std::pow(k + 1.0, n); }, "(N+1)^n");
        const auto B = generators(fb, eta_for_modes(fb, ph.table)).B;
        return min_constant(conjugate(rhs, B).op, {rhs}, fb, "Ngrow");
      });
    }
    const int cap8 = std::min(N, 5);
    for (int k = 1; k <= 2; ++k) {
      st.run(tag + " ANgrow k=" + std::to_string(k), N, 8, cap8, [&](const FockBasis& fb) {
        const auto rhs = number_function(fb, [k](int j) { return std::pow(j + 1.0, k); }, "(N+1)^k");
        const auto A = generators(fb, eta_for_modes(fb, ph.table)).A;
        return min_constant(conjugate(rhs, A).op, {rhs}, fb, "ANgrow");
      });
    }
    st.run(tag + " e^-A H e^A", N, 8, cap8, [&](const FockBasis& fb) {
      const auto pieces = hamiltonian_pieces(fb, step21());
      const auto A = generators(fb, eta_for_modes(fb, ph.table)).A;
      LinearOperator rhs = pieces.H + static_cast<double>(N) * number_function(fb, [](int j) { return j + 1.0; }, "");
      rhs.hermitian = true;
      return min_constant(conjugate(pieces.H, A).op, {rhs}, fb, "expAHNexpA");
    });
    st.run(tag + " R_eff lower bound", N, 4, N, [&](const FockBasis& fb) {
      const auto pieces = hamiltonian_pieces(fb, step21());
      const auto eff = effective_hamiltonians(fb, ph.renorm, pieces, step21());
      auto rep = condensation_lower_bound(eff.R_eff, pieces.H, fb, ph.renorm, ph.params, 0.1).inequality;
      return rep;
    });
  }
  const double k8 = localization_kappa(64, 8);
  const double k16 = localization_kappa(64, 16);
  const double ratio = k8 / k16;
  const bool loc_ok = ratio >= 3.0 && ratio <= 5.0;

  std::string detail = std::to_string(st.certified) + "/" + std::to_string(st.total) + " certified, " +
                       std::to_string(st.stable_pairs) + "/" + std::to_string(st.pairs) +
                       " stable under cap N-1 -> N (worst ratio " + fmt("%.4f", st.worst_ratio) +
                       "), Theta_M kappa(8)/kappa(16) at N=64 " + fmt("%.3f", ratio) + " (in [3, 5])";
  for (const auto& f : st.failures) detail += "; " + f;
  return {st.certified == st.total && st.stable_pairs == st.pairs && loc_ok, detail};
}

Outcome c8() {
  std::vector<int> Ns;
  for (int N = 10; N <= 60; N += 10) Ns.push_back(N);
  const auto tr = vacuum_trajectory(step21(), 3.0, 1.0, Ns);
  const bool slope_ok = tr.relative_slope_error <= 0.15;

  SweepConfig cfg;
  const auto ds = sweep(cfg, {});
  bool sandwich = ds.failed == 0;
  std::vector<double> dn;
  std::vector<double> logN;
  for (const auto& r : ds.records) {
    sandwich = sandwich && r.ok && r.sandwich;
    dn.push_back(r.depletion * r.N);
    logN.push_back(std::log(static_cast<double>(r.N)));
  }
  // depletion N bounded: the records where eta is nonzero (N >= 5) stay in
  // a factor 3 band and the log-log slope over the upper half is below 1/2.
  std::vector<double> live;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    if (ds.records[i].N >= 5) live.push_back(dn[i]);
  const double b = live.size() >= 2 ? band(live) : 1.0;
  const std::size_t h = dn.size() / 2;
  double slope = 0.0;
  if (dn.size() - h >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(dn.size() - h);
    for (std::size_t i = h; i < dn.size(); ++i) {
      const double x = logN[i];
      const double y = std::log(dn[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  const bool bounded = b <= 3.0 && slope < 0.5;

  std::string dns;
  for (std::size_t i = 0; i < dn.size(); ++i) dns += (i ? " " : "") + fmt("%.3g", dn[i]);
  return {slope_ok && sandwich && bounded,
          "vacuum slope " + fmt("%.3f", tr.slope) + " vs 2 pi alpha " + fmt("%.3f", tr.target) + " (relative error " +
              fmt("%.3f", tr.relative_slope_error) + ", <= 0.15); sandwich " + (sandwich ? "holds" : "violated") +
              " on " + std::to_string(ds.records.size()) + " records; depletion*N [" + dns + "], band " +
              fmt("%.2f", b) + " (<= 3), late log-log slope " + fmt("%.2f", slope) + " (< 0.5)"};
}

std::string read_csv(const fs::path& p, bool drop_last_column) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  if (!drop_last_column) {
    s << in.rdbuf();
    return s.str();
  }
  std::string line;
  while (std::getline(in, line)) s << line.substr(0, line.rfind(',')) << '\n';
  return s.str();
}

Outcome c9() {
  const auto base = fs::temp_directory_path() / "gp2d-acceptance-determinism";
  fs::remove_all(base);
  RunConfig cfg;
  std::vector<fs::path> dirs;
  for (int threads : {1, 2}) {
    DispatchOptions opts;
    opts.out = base / ("threads" + std::to_string(threads));
    opts.threads = threads;
    dispatch("all", cfg, opts);
    dirs.push_back(opts.out);
  }
  int files = 0;
  std::vector<std::string> differ;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    const auto name = e.path().filename();
    const bool timed = name == "energy_sweep.csv";  // wall_ms is the last column
    if (!fs::exists(dirs[1] / name) || read_csv(dirs[0] / name, timed) != read_csv(dirs[1] / name, timed)) {
      differ.push_back(name.string());
    }
  }
  fs::remove_all(base);
  std::string detail = std::to_string(files - static_cast<int>(differ.size())) + "/" + std::to_string(files) +
                       " CSV files identical between --threads 1 and 2 (wall_ms excluded)";
  for (const auto& d : differ) detail += "; differs: " + d;
  return {files > 0 && differ.empty(), detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    double budget_s;
    Outcome (*run)();
  };
  const Criterion all[] = {
      {"C1", "Neumann eigenvalue asymptotics", 30, c1},
      {"C2", "potential integral asymptotics", 30, c2},
      {"C3", "scattering length closed form", 5, c3},
      {"C4", "kernel bounds", 120, c4},
      {"C5", "renormalized potential", 120, c5},
      {"C6", "exact algebra", 60, c6},
      {"C7", "inequality audits", 300, c7},
      {"C8", "energy trajectory", 300, c8},
      {"C9", "determinism", 600, c9},
  };
  int passed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s <= c.budget_s;
    const bool pass = o.pass && in_time;
    passed += pass;
    std::printf("%s %s %s: %s [%.2f s, budget %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), s,
                c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d/9 criteria pass\n", passed);
  return 0;
}
