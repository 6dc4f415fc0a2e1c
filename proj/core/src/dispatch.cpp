#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "gp2d/audit.hpp"
#include "gp2d/bessel.hpp"
#include "gp2d/cli.hpp"
#include "gp2d/error.hpp"
#include "gp2d/parallel.hpp"

namespace gp2d {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

json to_json(const InequalityReport& r) {
  json c = json::array();
  for (const double x : r.constants) c.push_back(num(x));
  return {{"statement", r.statement},     {"constants", c},         {"min_eigenvalue", num(r.min_eigenvalue)},
          {"recheck", num(r.recheck_eigenvalue)}, {"scale", r.scale}, {"tolerance", r.tolerance},
          {"dim", r.dim},                  {"cap", r.cap},           {"pass", r.pass},
          {"unbounded", r.unbounded},      {"number_profile", r.number_profile}, {"note", r.note}};
}

// max / min over positive finite entries; +inf when any entry is not
double band_ratio(const std::vector<double>& xs) {
  if (xs.empty()) return 1.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const double x : xs) {
    if (!std::isfinite(x) || !(x > 0.0)) return std::numeric_limits<double>::infinity();
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return hi / lo;
}

// a constant at cap and cap - 1 is stable when the two agree within x2;
// two vanishing constants are trivially stable
bool stable_pair(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  const double hi = std::max(std::fabs(a), std::fabs(b));
  const double lo = std::min(std::fabs(a), std::fabs(b));
  if (hi <= 1e-12) return true;
  return hi < 2.0 * lo;
}

class Session {
public:
  Session(const RunConfig& cfg, const DispatchOptions& opts, fs::path out)
      : cfg_(cfg), opts_(opts), out_(std::move(out)), pot_(RadialPotential::from_spec(cfg.potential)) {}

  RunManifest& manifest() { return manifest_; }
  const fs::path& out() const { return out_; }

  void run(const std::string& command) {
    CommandStatus st;
    st.command = command;
    cur_ = &st;
    stage_ = "setup";
    try {
      if (command == "scatter") scatter();
      else if (command == "neumann") neumann();
      else if (command == "kernels") kernels();
      else if (command == "fock-audit") fock_audit();
      else if (command == "lower-bound") lower_bound();
      else if (command == "energy-sweep") energy_sweep();
      else throw Error(ErrorKind::invalid_input, "unknown command '" + command + "'");
    } catch (const std::exception& e) {
      st.ok = false;
      st.stage = stage_;
      st.error = e.what();
    }
    cur_ = nullptr;
    manifest_.commands.push_back(std::move(st));
  }

private:
  void check(std::string name, double value, double tol, bool pass, bool audit, std::string detail = {}) {
    cur_->checks.push_back({std::move(name), value, tol, pass, audit, std::move(detail)});
  }
  void warn(std::string w) { cur_->warnings.push_back(std::move(w)); }

  fs::path write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const fs::path p = out_ / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::io, "cannot write " + p.string());
    body(f);
    if (!f) throw Error(ErrorKind::io, "write failed for " + p.string());
    cur_->artifacts.push_back(name);
    return p;
  }
  void write_json(const std::string& name, const json& j) {
    write(name, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  }

  RadialOptions radial() const {
    RadialOptions r;
    r.rtol = cfg_.quad_tol;
    return r;
  }

  // --- scatter ------------------------------------------------------------
  void scatter() {
    stage_ = "scattering-length";
    ScatteringOptions so;
    so.radial = radial();
    const auto ze = scattering_length(pot_, so);
    json j{{"potential", pot_.spec()}, {"a", ze.a}, {"fit_residual", ze.fit_residual}, {"free", ze.free},
           {"range", pot_.range()}, {"l1", pot_.l1()}, {"l2", pot_.l2()}, {"l3", pot_.l3()}};
    check("fit residual", ze.fit_residual, so.fit_tolerance, ze.fit_residual <= so.fit_tolerance, true);
    if (pot_.kind() == PotentialKind::step && !pot_.is_zero()) {
      // interior I0(kappa r), exterior log(r / a), matched at b
      const double b = pot_.range();
      const double x = std::sqrt(0.5 * pot_.strength()) * b;
      const double closed = b * std::exp(-bessel::i0_scaled(x) / (x * bessel::i1_scaled(x)));
      const double rel = std::fabs(ze.a - closed) / closed;
      j["closed_form"] = closed;
      j["relative_error"] = rel;
      check("a vs Bessel matching", rel, 1e-6, rel <= 1e-6, true);
    }
    const double v0 = fourier_transform_radial(pot_, 0.0);
    const double vrel = pot_.is_zero() ? std::fabs(v0) : std::fabs(v0 - pot_.l1()) / pot_.l1();
    check("V_hat(0) = int V", vrel, 1e-10, vrel <= 1e-10, true);
    write_json("scatter.json", j);
    write("zero_energy.csv", [&](std::ostream& o) {
      o << "r,phi,dphi\n";
      for (std::size_t i = 0; i < ze.phi.size(); ++i) {
        o << fmt("%.17g", ze.grid.r[i]) << ',' << fmt("%.17g", ze.phi[i]) << ',' << fmt("%.17g", ze.dphi[i]) << '\n';
      }
    });
    if (opts_.log) *opts_.log << "  a = " << fmt("%.12g", ze.a) << "\n";
  }

  // --- neumann ------------------------------------------------------------
  void neumann() {
    stage_ = "neumann";
    NeumannOptions no;
    no.radial = radial();
    const auto& Rs = cfg_.neumann_R;
    std::vector<NeumannSolution> sols(Rs.size());
    std::vector<AsymptoticsReport> reps(Rs.size());
    parallel_for(Rs.size(), [&](std::size_t i) {
      sols[i] = neumann_ground_state(pot_, Rs[i], no);
      reps[i] = validate_neumann_asymptotics(sols[i], pot_);
    });
    json arr = json::array();
    std::vector<double> e1, e2;
    for (std::size_t i = 0; i < Rs.size(); ++i) {
      const auto& s = sols[i];
      const auto& r = reps[i];
      const std::string name = "neumann_profile_R" + fmt("%g", Rs[i]) + ".csv";
      write(name, [&](std::ostream& o) { s.write_csv(o); });
      arr.push_back({{"R", Rs[i]}, {"lambda", s.lambda}, {"mu", s.mu}, {"a", s.a}, {"eps", s.eps},
                     {"int_vf", s.int_vf}, {"L", num(r.L)}, {"e1", num(r.e1)}, {"e2", num(r.e2)},
                     {"e3", num(r.e3)}, {"e4", num(r.e4)}, {"shots", s.shots}, {"profile", name}});
      e1.push_back(r.e1);
      e2.push_back(r.e2);
      const double fmin = *std::min_element(s.f.begin(), s.f.end());
      const double fmax = *std::max_element(s.f.begin(), s.f.end());
      const bool inv = fmin >= -1e-12 && fmax <= 1.0 + 1e-12 && std::fabs(s.f.back() - 1.0) <= 1e-12;
      check("0 <= f <= 1, f(R) = 1 at R=" + fmt("%g", Rs[i]), std::max(-fmin, fmax - 1.0), 1e-12, inv, true);
    }
    if (pot_.is_zero()) {
      warn("free potential: L = log(R/a) is infinite, asymptotic bands not applicable");
    } else if (Rs.size() >= 2) {
      const double b1 = band_ratio(e1);
      const double b2 = band_ratio(e2);
      check("e1 band (max/min)", b1, 3.0, b1 <= 3.0, false);
      check("int Vf band (max/min)", b2, 3.0, b2 <= 3.0, false);
    }
    write_json("neumann.json", {{"potential", pot_.spec()}, {"radii", arr}});
  }

  // --- kernels ------------------------------------------------------------
  void kernels() {
    stage_ = "kernel-tables";
    const auto lat = build_lattice(cfg_.cutoff);
    const auto& Ns = cfg_.kernel_N;
    struct Row {
      double sup_p2 = 0, norm2_scaled = 0, residual = 0, truncated = 0, parseval = 0, eta0 = 0;
      bool core = false, dominated = false;
    };
    std::vector<Row> rows(Ns.size());
    for (std::size_t i = 0; i < Ns.size(); ++i) {
      GPParameters params{Ns[i], cfg_.alpha, cfg_.ell_prefactor};
      params.validate();
      NeumannOptions no;
      no.radial = radial();
      const auto sol = kernel_neumann(pot_, params, no);
      const EtaTransform tr(sol, params);
      const auto tab = eta_coefficients(tr, params, lat);
      const auto renorm = renormalized_potential(params, sol.mu, sol.log_R, lat);
      const auto res = scattering_residual(tab, tr, renorm, pot_, params);
      const auto pv = parseval_check(tr, params);
      rows[i] = {tab.sup_p2, tab.norm2 * params.N_alpha(), res.max_relative, res.max_truncated, pv.relative,
                 tab.eta0, res.core_regime, res.truncation_dominated};
      write("kernels_N" + std::to_string(Ns[i]) + ".csv", [&](std::ostream& o) { write_kernel_csv(o, tab, renorm); });
    }
    json arr = json::array();
    std::vector<double> sup, nrm;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
      const auto& r = rows[i];
      arr.push_back({{"N", Ns[i]}, {"sup_p2", r.sup_p2}, {"norm2_N_alpha", r.norm2_scaled},
                     {"scattering_residual", r.residual}, {"truncated_residual", num(r.truncated)},
                     {"parseval_relative", r.parseval}, {"eta0", r.eta0}, {"core_regime", r.core}});
      sup.push_back(r.sup_p2);
      nrm.push_back(r.norm2_scaled);
      check("scattering equation N=" + std::to_string(Ns[i]), r.residual, 1e-3, r.residual <= 1e-3, true);
      if (r.core) warn("N=" + std::to_string(Ns[i]) + ": e^N ell inside the potential range (core regime)");
    }
    if (!pot_.is_zero() && Ns.size() >= 2) {
      const double b1 = band_ratio(sup);
      const double b2 = band_ratio(nrm);
      check("max |eta_p| p^2 band", b1, 2.0, b1 < 2.0, false);
      check("|eta|_2 N^alpha band", b2, 2.0, b2 < 2.0, false);
    }

    stage_ = "renormalized-potential";
    const auto& Ms = cfg_.scalar_N;
    std::vector<double> w0(Ms.size()), dev(Ms.size()), S(Ms.size()), Sml(Ms.size());
    const auto small = build_lattice(2.0 * pi);
    parallel_for(Ms.size(), [&](std::size_t i) {
      GPParameters params{Ms[i], cfg_.alpha, cfg_.ell_prefactor};
      params.validate();
      NeumannOptions no;
      no.radial = radial();
      const auto sol = kernel_neumann(pot_, params, no);
      const auto renorm = renormalized_potential(params, sol.mu, sol.log_R, small);
      const double n = Ms[i];
      w0[i] = renorm.omega0;
      dev[i] = std::fabs(renorm.omega0 - 4.0 * pi * (1.0 + cfg_.alpha * std::log(n) / n)) * n;
      const auto om = omega_lattice_sum(renorm, params, 2.0 * pi * params.N_alpha());
      S[i] = om.S;
      Sml[i] = om.minus_log;
    });
    write("omega.csv", [&](std::ostream& o) {
      o << "N,omega0,omega0_dev_N,S,S_minus_log\n";
      for (std::size_t i = 0; i < Ms.size(); ++i) {
        o << Ms[i] << ',' << fmt("%.17g", w0[i]) << ',' << fmt("%.17g", dev[i]) << ',' << fmt("%.17g", S[i]) << ','
          << fmt("%.17g", Sml[i]) << '\n';
      }
    });
    if (!pot_.is_zero() && Ms.size() >= 2) {
      const double b = band_ratio(dev);
      check("|omega0 - 4pi(1 + alpha log N / N)| N band", b, 3.0, b <= 3.0, false);
      const auto [lo, hi] = std::minmax_element(Sml.begin(), Sml.end());
      check("S - 2 pi alpha log N spread", *hi - *lo, 10.0, *hi - *lo <= 10.0, false,
            "within +-5 of the midpoint");
    }
    write_json("kernels.json", {{"kernels", arr}, {"omega", {{"N", Ms}, {"omega0", w0}, {"S_minus_log", Sml}}}});
  }

  // --- Fock space audits ---------------------------------------------------
  struct Physics {
    GPParameters params;
    NeumannSolution sol;
    KernelTable table;
    RenormPotential renorm;
  };

  Physics physics(int N) const {
    Physics ph;
    ph.params = GPParameters{N, cfg_.alpha, cfg_.ell_prefactor};
    ph.params.validate();
    NeumannOptions no;
    no.radial = radial();
    ph.sol = kernel_neumann(pot_, ph.params, no);
    const auto lat = build_lattice(cfg_.cutoff);
    const EtaTransform tr(ph.sol, ph.params);
    ph.table = eta_coefficients(tr, ph.params, lat);
    ph.renorm = renormalized_potential(ph.params, ph.sol.mu, ph.sol.log_R, lat);
    return ph;
  }

  MinConstantOptions mc() const {
    MinConstantOptions o;
    o.psd_tol = cfg_.psd_tol;
    return o;
  }

  // one certification at cap and at cap - 1 (when cap > 1)
  using Builder = std::function<InequalityReport(const FockBasis&)>;
  json certify_stable(const std::string& name, int N, int shell, int cap, const Builder& build) {
    const FockBasis hi(shell_modes(shell), cap, N);
    const auto r_hi = build(hi);
    json j{{"cap", to_json(r_hi)}};
    check(name + " certified", r_hi.min_eigenvalue, -r_hi.tolerance * r_hi.scale,
          r_hi.pass && std::isfinite(r_hi.constants.front()), true, fmt("c = %.6g", r_hi.constants.front()));
    if (cap > 1) {
      const FockBasis lo(shell_modes(shell), cap - 1, N);
      const auto r_lo = build(lo);
      j["cap_minus_1"] = to_json(r_lo);
      const double a = r_hi.constants.front();
      const double b = r_lo.constants.front();
      const double ratio = (std::fabs(a) <= 1e-12 && std::fabs(b) <= 1e-12) ? 1.0 : std::max(a, b) / std::min(a, b);
      check(name + " stable under cap+1", ratio, 2.0, stable_pair(a, b), true);
    }
    return j;
  }

  void fock_audit() {
    for (const int N : cfg_.N) {
      const std::string tag = "N=" + std::to_string(N);
      stage_ = "physics " + tag;
      const auto ph = physics(N);
      const int cap = cfg_.cap_for(N);
      json rep{{"N", N}, {"cap", cap}, {"shell", cfg_.shell}};
      const FockBasis basis(shell_modes(cfg_.shell), cap, N);
      rep["dim"] = basis.dim();
      const auto eta = eta_for_modes(basis, ph.table);
      const bool eta_zero = std::all_of(eta.begin(), eta.end(), [](double e) { return e == 0.0; });
      if (eta_zero) warn(tag + ": eta vanishes on the mode shell, B = A = 0 (core regime)");

      if (cfg_.audit_selected("algebra")) {
        stage_ = "algebra " + tag;
        json a = json::array();
        for (const auto& c : commutator_checks(basis, 1e-10)) {
          check(tag + " " + c.name, c.residual, c.tolerance, c.pass(), true);
          a.push_back({{"identity", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"pass", c.pass()}});
        }
        if (N <= 3) {
          const auto um = unitary_excitation_map(shell_modes(cfg_.shell), N);
          if (!um.skipped) {
            check(tag + " U_N rules", um.max_residual(), 1e-10, um.max_residual() <= 1e-10, true);
            a.push_back({{"identity", "U_N rules"}, {"residual", um.max_residual()}, {"tolerance", 1e-10},
                         {"pass", um.max_residual() <= 1e-10}});
          }
        }
        const auto g = generators(basis, eta);
        for (const auto* op : {&g.B, &g.A}) {
          const double anti = max_abs_entry(op->matrix + linalg::SparseMatrix(op->matrix.adjoint()));
          double defect = 0.0;
          unitary_exponential(*op, &defect);
          check(tag + " " + op->symbol + " antisymmetric", anti, 1e-10, anti <= 1e-10, true);
          check(tag + " e^" + op->symbol + " unitary", defect, 1e-10, defect <= 1e-10, true);
          a.push_back({{"identity", op->symbol + " + " + op->symbol + "^*"}, {"residual", anti}, {"pass", anti <= 1e-10}});
          a.push_back({{"identity", "unitarity e^" + op->symbol}, {"residual", defect}, {"pass", defect <= 1e-10}});
        }
        const auto pieces = hamiltonian_pieces(basis, pot_);
        const auto eff = effective_hamiltonians(basis, ph.renorm, pieces, pot_);
        const int M = std::max(1, static_cast<int>(std::lround(std::pow(N, 0.8))));
        const auto loc = localization_check(eff.R_eff, pieces.H, basis, Partition::smooth(), M, false);
        check(tag + " localization identity", loc.identity_residual, 1e-10, loc.identity_residual <= 1e-10, true);
        a.push_back({{"identity", "localization"}, {"M", M}, {"residual", loc.identity_residual},
                     {"pass", loc.identity_residual <= 1e-10}});
        rep["algebra"] = a;
      }

      if (cfg_.audit_selected("ngrow")) {
        stage_ = "ngrow " + tag;
        json a = json::object();
        for (int n = 1; n <= 3; ++n) {
          a[std::to_string(n)] = certify_stable(tag + " e^-B (N+1)^" + std::to_string(n) + " e^B", N, cfg_.shell, cap,
                                                [&](const FockBasis& fb) {
                                                  const auto rhs = number_function(
                                                      fb, [n](int k) { return std::pow(k + 1.0, n); }, "(N_+ + 1)^n");
                                                  const auto B = generators(fb, eta_for_modes(fb, ph.table)).B;
                                                  return min_constant(conjugate(rhs, B).op, {rhs}, fb,
                                                                      "e^-B (N_+ + 1)^n e^B <= c (N_+ + 1)^n", mc());
                                                });
        }
        // growth of the n = 1 constant under eta -> s eta
        json growth = json::array();
        std::vector<double> cs;
        for (const double s : {1.0, 2.0, 4.0}) {
          auto e = eta;
          for (auto& x : e) x *= s;
          const auto rhs = number_function(basis, [](int k) { return k + 1.0; }, "N_+ + 1");
          const auto B = generators(basis, e).B;
          const auto r = min_constant(conjugate(rhs, B).op, {rhs}, basis, "eta scaling", mc());
          cs.push_back(r.constants.front());
          growth.push_back({{"scale", s}, {"c", num(r.constants.front())}});
        }
        const bool mono = cs[0] <= cs[1] * (1 + 1e-3) && cs[1] <= cs[2] * (1 + 1e-3);
        check(tag + " ngrow constant nondecreasing in |eta|", cs[2], 0.0, mono, false);
        a["eta_scaling"] = growth;
        rep["ngrow"] = a;
      }

      // A vanishes on the 4-shell, so its audits use the 8-shell
      const int cap8 = std::min(N, 5);
      if (cfg_.audit_selected("angrow")) {
        stage_ = "angrow " + tag;
        json a = json::object();
        for (int k = 1; k <= 2; ++k) {
          a[std::to_string(k)] = certify_stable(tag + " e^-A (N+1)^" + std::to_string(k) + " e^A", N, 8, cap8,
                                                [&](const FockBasis& fb) {
                                                  const auto rhs = number_function(
                                                      fb, [k](int j) { return std::pow(j + 1.0, k); }, "(N_+ + 1)^k");
                                                  const auto A = generators(fb, eta_for_modes(fb, ph.table)).A;
                                                  return min_constant(conjugate(rhs, A).op, {rhs}, fb,
                                                                      "e^-A (N_+ + 1)^k e^A <= c (N_+ + 1)^k", mc());
                                                });
        }
        rep["angrow"] = a;
      }
      if (cfg_.audit_selected("expahn")) {
        stage_ = "expahn " + tag;
        rep["expahn"] = certify_stable(tag + " e^-A H_N e^A", N, 8, cap8, [&](const FockBasis& fb) {
          const auto pieces = hamiltonian_pieces(fb, pot_);
          const auto A = generators(fb, eta_for_modes(fb, ph.table)).A;
          LinearOperator rhs = pieces.H + static_cast<double>(N) * number_function(fb, [](int j) { return j + 1.0; }, "");
          rhs.hermitian = true;
          rhs.symbol = "H_N + N (N_+ + 1)";
          return min_constant(conjugate(pieces.H, A).op, {rhs}, fb, "e^-A H_N e^A <= c (H_N + N (N_+ + 1))", mc());
        });
      }
      if (cfg_.audit_selected("localization")) {
        stage_ = "localization " + tag;
        const auto pieces = hamiltonian_pieces(basis, pot_);
        const auto eff = effective_hamiltonians(basis, ph.renorm, pieces, pot_);
        const int M = std::max(1, static_cast<int>(std::lround(std::pow(N, 0.8))));
        const auto loc = localization_check(eff.R_eff, pieces.H, basis, Partition::smooth(), M, true);
        check(tag + " Theta_M bound certified", loc.constant(), 0.0,
              loc.plus.pass && loc.minus.pass && std::isfinite(loc.constant()), true);
        rep["localization"] = {{"M", M}, {"identity_residual", loc.identity_residual}, {"c", num(loc.constant())},
                               {"plus", to_json(loc.plus)}, {"minus", to_json(loc.minus)}};
      }
      if (cfg_.audit_selected("gn-shape")) {
        stage_ = "gn-shape " + tag;
        const auto pieces = hamiltonian_pieces(basis, pot_);
        const auto B = generators(basis, eta).B;
        const auto G = conjugate(pieces.L, B).op;
        const auto shape = gn_condensation_shape(G, basis, N, 4.0 * pi * pi);
        check(tag + " G - 2piN >= c N_+ - C nonempty", shape.front.back().C, 0.0, shape.nonempty_positive, true);
        check(tag + " depletion chain", shape.ground_depletion, 0.0, shape.depletion_chain, true);
        json front = json::array();
        for (const auto& p : shape.front) front.push_back({{"c", p.c}, {"C", num(p.C)}});
        rep["gn_shape"] = {{"front", front}, {"ground_energy", shape.ground_energy},
                           {"ground_depletion", shape.ground_depletion}};
      }
      write_json("fock_audit_N" + std::to_string(N) + ".json", rep);
    }
  }

  static double max_abs_entry(const linalg::SparseMatrix& m) {
    double x = 0.0;
    for (int k = 0; k < m.outerSize(); ++k) {
      for (linalg::SparseMatrix::InnerIterator it(m, k); it; ++it) x = std::max(x, std::abs(it.value()));
    }
    return x;
  }

  // --- condensation lower bound ------------------------------------------
  void lower_bound() {
    if (!cfg_.audit_selected("condensation")) {
      warn("condensation audit not selected");
      return;
    }
    for (const int N : cfg_.N) {
      const std::string tag = "N=" + std::to_string(N);
      stage_ = "condensation " + tag;
      const auto ph = physics(N);
      const int cap = cfg_.cap_for(N);
      auto run = [&](int c) {
        const FockBasis fb(shell_modes(cfg_.shell), c, N);
        const auto pieces = hamiltonian_pieces(fb, pot_);
        const auto eff = effective_hamiltonians(fb, ph.renorm, pieces, pot_);
        return condensation_lower_bound(eff.R_eff, pieces.H, fb, ph.renorm, ph.params, cfg_.condensation_c);
      };
      const auto hi = run(cap);
      json rep{{"N", N},
               {"cap", cap},
               {"c", hi.c},
               {"C", num(hi.C)},
               {"lower_bound", num(hi.lower_bound)},
               {"inequality", to_json(hi.inequality)},
               {"mu", hi.mu},
               {"scalar_worst", hi.scalar_worst},
               {"riemann_sum", num(hi.riemann_sum)},
               {"riemann_integral", hi.riemann_integral},
               {"omega_sum", hi.omega_sum},
               {"omega_minus_log", hi.omega_minus_log},
               {"small_N", hi.small_N}};
      check(tag + " R_eff lower bound certified", hi.inequality.min_eigenvalue,
            -hi.inequality.tolerance * hi.inequality.scale, hi.inequality.pass && std::isfinite(hi.C), true,
            fmt("C = %.6g", hi.C));
      check(tag + " completion of the square", hi.scalar_worst, 1.0, hi.scalar_pass, true);
      if (std::isfinite(hi.riemann_sum)) {
        check(tag + " lattice sum <= integral", hi.riemann_sum, hi.riemann_integral,
              hi.riemann_sum <= hi.riemann_integral, true);
      }
      if (cap > 1) {
        const auto lo = run(cap - 1);
        rep["cap_minus_1"] = {{"C", num(lo.C)}, {"inequality", to_json(lo.inequality)}};
        check(tag + " C stable under cap+1", std::isfinite(lo.C) ? lo.C : -1.0, 2.0, stable_pair(hi.C, lo.C), true);
      }
      if (hi.small_N) warn(tag + ": small-N run; the bound is stated for N large enough");
      write_json("lower_bound_N" + std::to_string(N) + ".json", rep);
    }
  }

  // --- energies ------------------------------------------------------------
  void energy_sweep() {
    stage_ = "sweep";
    const auto sc = cfg_.sweep_config();
    const auto ds = sweep(sc, out_);
    cur_->artifacts.push_back("energy_sweep.csv");
    cur_->artifacts.push_back("energy_sweep.json");
    if (opts_.log) *opts_.log << "  skipped: " << ds.skipped << " records, computed: " << ds.computed << "\n";
    std::vector<double> depN;
    for (const auto& r : ds.records) {
      const std::string tag = "N=" + std::to_string(r.N);
      if (!r.ok) {
        check(tag + " record", 0.0, 0.0, false, true, r.error);
        continue;
      }
      check(tag + " lower bound <= E0 <= E_vac", r.E0, r.E_vac, r.sandwich, true);
      check(tag + " depletion in [0,1]", r.depletion, 1.0, r.depletion >= -1e-12 && r.depletion <= 1.0 + 1e-12, true);
      depN.push_back(r.depletion * r.N);
    }
    if (depN.size() >= 2) {
      const double mx = *std::max_element(depN.begin(), depN.end());
      check("depletion N bounded (max)", mx, 1.0, mx <= 1.0, false, "fewer than one excitation on average");
    }

    stage_ = "vacuum-trajectory";
    const auto t = vacuum_trajectory(pot_, cfg_.alpha, cfg_.ell_prefactor, cfg_.scalar_N);
    write("trajectory.csv", [&](std::ostream& o) {
      o << "N,omega0,E_vac,excess,excess_per_log\n";
      for (const auto& p : t.points) {
        o << p.N << ',' << fmt("%.17g", p.omega0) << ',' << fmt("%.17g", p.E_vac) << ',' << fmt("%.17g", p.excess)
          << ',' << fmt("%.17g", p.excess_per_log) << '\n';
      }
    });
    if (!pot_.is_zero() && t.points.size() >= 2) {
      check("vacuum slope vs 2 pi alpha", t.relative_slope_error, 0.15, t.relative_slope_error <= 0.15, false,
            fmt("slope %.4g", t.slope) + fmt(" target %.4g", t.target));
      check("(E_vac - 2piN)/log N in (0,30)", t.points.back().excess_per_log, 30.0, t.in_band, false);
      if (t.points.size() >= 3) check("(E_vac - 2piN)/log N flattening", 0.0, 0.0, t.flattening, false);
    }
  }

  const RunConfig& cfg_;
  const DispatchOptions& opts_;
  fs::path out_;
  RadialPotential pot_;
  RunManifest manifest_;
  CommandStatus* cur_ = nullptr;
  std::string stage_;
};

void write_plots_script(const fs::path& dir, const RunManifest& m) {
  auto has = [&](const std::string& a) {
    for (const auto& c : m.commands) {
      if (std::find(c.artifacts.begin(), c.artifacts.end(), a) != c.artifacts.end()) return true;
    }
    return false;
  };
  std::ofstream o(dir / "plots.gp", std::ios::binary);
  o << "# gnuplot script; run from this directory with: gnuplot plots.gp\n"
    << "set datafile separator ','\nset terminal pngcairo size 900,600\nset key autotitle columnhead\n";
  if (has("energy_sweep.csv")) {
    o << "set output 'energies.png'\nset xlabel 'N'\nset ylabel 'energy'\n"
      << "plot 'energy_sweep.csv' using 1:5 with linespoints title 'E_vac', "
         "'' using 1:6 with linespoints title 'E0', 2*pi*x with lines title '2 pi N'\n";
  }
  if (has("trajectory.csv")) {
    o << "set output 'vacuum_excess.png'\nset logscale x\nset xlabel 'N'\nset ylabel '(E_vac - 2 pi N)'\n"
      << "plot 'trajectory.csv' using 1:4 with linespoints title 'excess'\nunset logscale x\n";
  }
  if (has("omega.csv")) {
    o << "set output 'omega0.png'\nset xlabel 'N'\nset ylabel 'omega_hat(0)'\n"
      << "plot 'omega.csv' using 1:2 with linespoints title 'omega0'\n";
  }
}

}  // namespace

bool RunManifest::audits_passed() const {
  for (const auto& c : commands) {
    if (!c.ok) return false;
    for (const auto& k : c.checks) {
      if (k.audit && !k.pass) return false;
    }
  }
  return true;
}

std::size_t RunManifest::warning_count() const {
  std::size_t n = 0;
  for (const auto& c : commands) {
    n += c.warnings.size();
    for (const auto& k : c.checks) n += (!k.audit && !k.pass) ? 1 : 0;
  }
  return n;
}

int RunManifest::exit_status(bool strict) const {
  if (!audits_passed()) return 1;
  if (strict && warning_count() > 0) return 1;
  return 0;
}

void write_run_manifest(std::ostream& out, const RunManifest& m) {
  json cmds = json::array();
  for (const auto& c : m.commands) {
    json checks = json::array();
    for (const auto& k : c.checks) {
      checks.push_back({{"name", k.name}, {"value", num(k.value)}, {"tolerance", num(k.tolerance)},
                        {"pass", k.pass}, {"kind", k.audit ? "audit" : "diagnostic"}, {"detail", k.detail}});
    }
    cmds.push_back({{"command", c.command}, {"status", c.ok ? "ok" : "failed"}, {"stage", c.stage},
                    {"error", c.error}, {"artifacts", c.artifacts}, {"checks", checks}, {"warnings", c.warnings}});
  }
  const json j{{"fingerprint", m.fingerprint}, {"version", m.version}, {"commands", cmds},
               {"audits_passed", m.audits_passed()}};
  out << j.dump(2) << '\n';
}

RunManifest dispatch(std::string_view command, const RunConfig& cfg, const DispatchOptions& opts) {
  cfg.validate();
  const auto& known = known_commands();
  if (std::find(known.begin(), known.end(), command) == known.end()) {
    throw Error(ErrorKind::invalid_input, "unknown command '" + std::string(command) + "'");
  }
  set_threads(opts.threads);
  const fs::path out = resolve_out_dir(cfg, opts.out);
  fs::create_directories(out);

  Session s(cfg, opts, out);
  s.manifest().fingerprint = cfg.fingerprint();
  std::vector<std::string> todo;
  if (command == "all") {
    todo.assign(known.begin(), known.end() - 1);
  } else {
    todo.emplace_back(command);
  }
  for (const auto& c : todo) {
    const auto t0 = std::chrono::steady_clock::now();
    if (opts.log) *opts.log << "[" << c << "]\n";
    s.run(c);
    auto& st = s.manifest().commands.back();
    if (cfg.alpha <= 2.0) {
      st.warnings.push_back("alpha <= 2: the renormalization propositions assume alpha > 2");
    } else if (cfg.alpha < 2.5) {
      st.warnings.push_back("alpha < 5/2: the final proposition assumes alpha >= 5/2");
    }
    if (opts.log) {
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      auto& o = *opts.log;
      for (const auto& k : st.checks) {
        char line[256];
        std::snprintf(line, sizeof line, "  %-52.52s %12.4g  %-4s %s\n", k.name.c_str(), k.value,
                      k.pass ? "PASS" : (k.audit ? "FAIL" : "WARN"), k.detail.c_str());
        o << line;
      }
      for (const auto& w : st.warnings) o << "  note: " << w << "\n";
      if (!st.ok) o << "  FAILED at " << st.stage << ": " << st.error << "\n";
      o << "  (" << fmt("%.0f", ms) << " ms)\n";
    }
  }
  if (opts.emit_plots_script) write_plots_script(out, s.manifest());
  {
    std::ofstream m(out / "run_manifest.json", std::ios::binary);
    write_run_manifest(m, s.manifest());
  }
  return s.manifest();
}

}  // namespace gp2d
