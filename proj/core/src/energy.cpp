#include "gp2d/energy.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "gp2d/audit.hpp"
#include "gp2d/error.hpp"
#include "gp2d/parallel.hpp"

namespace gp2d {

namespace {

constexpr double pi = std::numbers::pi;

// Shortest round-trip decimal; independent of the global locale.
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

double number_or_nan(const nlohmann::json& j) {
  return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

bool record_less(const EnergyRecord& a, const EnergyRecord& b) {
  if (a.N != b.N) return a.N < b.N;
  if (a.alpha != b.alpha) return a.alpha < b.alpha;
  return a.cutoff < b.cutoff;
}

}  // namespace

std::string fingerprint(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  static constexpr char hex[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hex[h & 0xF];
    h >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

double vacuum_upper_bound(const GPParameters& params, const RenormPotential& renorm) {
  return 0.5 * renorm.omega0 * (params.N - 1);
}

GroundState ground_state(const LinearOperator& op, const FockBasis& basis, std::size_t dense_cap,
                         const linalg::LanczosOptions& lanczos) {
  op.check_hermitian(1e-10);
  const auto d = op.dim();
  if (d == 0) throw Error(ErrorKind::size, "ground state of an empty operator");
  const auto blocks = linalg::connected_blocks({&op.matrix}, d);
  std::size_t largest = 0;
  for (const auto& b : blocks) largest = std::max(largest, b.size());

  GroundState gs;
  linalg::EigenPair pair;
  if (largest <= dense_cap) {
    pair = linalg::smallest_eigenpair(op.matrix);
    gs.dense = true;
  } else {
    const linalg::SparseMatrix& m = op.matrix;
    pair = linalg::lanczos_smallest([&m](const linalg::Vector& v) { return linalg::Vector(m * v); }, d, lanczos);
    gs.dense = false;
  }
  gs.energy = pair.value;
  gs.residual = pair.residual;
  gs.vector = FockVector(pair.vector);
  double n = 0.0;
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    n += basis.total(i) * std::norm(pair.vector(static_cast<Eigen::Index>(i)));
  }
  gs.depletion = n / basis.particles();
  return gs;
}

std::string SweepConfig::canonical() const {
  std::ostringstream os;
  os << "potential = " << potential << "\n";
  os << "N =";
  for (const int n : N_values) os << ' ' << n;
  os << "\nalpha =";
  for (const double a : alphas) os << ' ' << num(a);
  os << "\ncutoff = " << num(cutoff) << "\n";
  os << "ell_prefactor = " << num(ell_prefactor) << "\n";
  os << "shell = " << shell << "\n";
  os << "cap = " << cap << "\n";
  os << "condensation_c = " << num(condensation_c) << "\n";
  os << "lower_bound = " << (lower_bound ? "true" : "false") << "\n";
  os << "dense_cap = " << dense_cap << "\n";
  os << "eig_tol = " << num(eig_tol) << "\n";
  os << "quad_tol = " << num(quad_tol) << "\n";
  os << "seed = " << seed << "\n";
  return os.str();
}

EnergyRecord compute_record(const SweepConfig& cfg, int N, double alpha) {
  const auto t0 = std::chrono::steady_clock::now();
  EnergyRecord r;
  r.N = N;
  r.alpha = alpha;
  r.cutoff = cfg.cutoff;

  const auto pot = RadialPotential::from_spec(cfg.potential);
  GPParameters params{N, alpha, cfg.ell_prefactor};
  params.validate();
  NeumannOptions nopts;
  nopts.radial.rtol = cfg.quad_tol;
  const auto sol = kernel_neumann(pot, params, nopts);
  const auto lat = build_lattice(cfg.cutoff);
  const auto renorm = renormalized_potential(params, sol.mu, sol.log_R, lat);
  r.lambda_group = sol.mu;
  r.omega0 = renorm.omega0;

  const int cap = cfg.cap > 0 ? std::min(cfg.cap, N) : N;
  const FockBasis basis(shell_modes(cfg.shell), cap, N);
  r.dim = basis.dim();
  const auto pieces = hamiltonian_pieces(basis, pot);
  const auto eff = effective_hamiltonians(basis, renorm, pieces, pot);

  r.E_vac = eff.G_eff.matrix.coeff(0, 0).real();
  const double bound = vacuum_upper_bound(params, renorm);
  const double scale = std::max(1.0, std::fabs(bound));
  if (std::fabs(r.E_vac - bound) > 1e-10 * scale) {
    throw Error(ErrorKind::internal_consistency, "vacuum expectation of G_eff differs from omega(0)(N-1)/2");
  }
  linalg::LanczosOptions lz;
  lz.tol = cfg.eig_tol;
  lz.seed = cfg.seed;
  const auto gs = ground_state(eff.R_eff, basis, cfg.dense_cap, lz);
  r.E0 = gs.energy;
  r.depletion = gs.depletion;
  r.residual = gs.residual;

  const double r_vac = eff.R_eff.matrix.coeff(0, 0).real();
  bool sandwich = r.E0 <= r_vac + 1e-8 * scale && r.E0 <= r.E_vac + 1e-8 * scale;
  if (cfg.lower_bound) {
    const auto cl = condensation_lower_bound(eff.R_eff, pieces.H, basis, renorm, params, cfg.condensation_c);
    r.lower_bound = cl.lower_bound;
    r.lower_C = cl.C;
    sandwich = sandwich && cl.lower_bound <= r.E0 + 1e-8 * scale;
  } else {
    r.lower_bound = std::numeric_limits<double>::quiet_NaN();
    r.lower_C = std::numeric_limits<double>::quiet_NaN();
  }
  r.sandwich = sandwich;
  r.ok = true;
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

SweepDataset sweep(const SweepConfig& cfg, const std::filesystem::path& dir) {
  SweepDataset ds;
  ds.fingerprint = fingerprint(cfg.canonical());

  std::map<std::pair<int, double>, EnergyRecord> done;
  const bool persist = !dir.empty();
  if (persist) {
    for (auto& r : read_manifest(dir / "energy_sweep.json", ds.fingerprint)) {
      if (r.ok && r.cutoff == cfg.cutoff) done[{r.N, r.alpha}] = std::move(r);
    }
  }

  std::vector<std::pair<int, double>> grid;
  for (const int n : cfg.N_values) {
    for (const double a : cfg.alphas) grid.emplace_back(n, a);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<std::pair<int, double>> pending;
  for (const auto& g : grid) {
    if (!done.count(g)) pending.push_back(g);
  }
  std::vector<EnergyRecord> fresh(pending.size());
  parallel_for(pending.size(), [&](std::size_t i) {
    const auto [n, a] = pending[i];
    try {
      fresh[i] = compute_record(cfg, n, a);
    } catch (const std::exception& e) {
      EnergyRecord r;
      r.N = n;
      r.alpha = a;
      r.cutoff = cfg.cutoff;
      r.ok = false;
      r.error = e.what();
      const double nan = std::numeric_limits<double>::quiet_NaN();
      r.E_vac = r.E0 = r.depletion = r.lambda_group = r.omega0 = r.lower_bound = r.lower_C = nan;
      fresh[i] = std::move(r);
    }
  });

  ds.skipped = grid.size() - pending.size();
  ds.computed = pending.size();
  for (auto& [key, r] : done) {
    if (std::binary_search(grid.begin(), grid.end(), key)) ds.records.push_back(std::move(r));
  }
  for (auto& r : fresh) {
    if (!r.ok) ++ds.failed;
    ds.records.push_back(std::move(r));
  }
  std::sort(ds.records.begin(), ds.records.end(), record_less);

  if (persist) {
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "energy_sweep.csv", std::ios::binary);
    write_csv(csv, ds);
    std::ofstream man(dir / "energy_sweep.json", std::ios::binary);
    write_manifest(man, ds, cfg);
    if (!csv || !man) throw Error(ErrorKind::io, "could not write the sweep dataset under " + dir.string());
  }
  return ds;
}

void write_csv(std::ostream& out, const SweepDataset& ds) {
  out << "N,alpha,cutoff,dim,E_vac,E0,depletion,lambda_group,omega0,wall_ms\n";
  for (const auto& r : ds.records) {
    out << r.N << ',' << num(r.alpha) << ',' << num(r.cutoff) << ',' << r.dim << ',' << num(r.E_vac) << ','
        << num(r.E0) << ',' << num(r.depletion) << ',' << num(r.lambda_group) << ',' << num(r.omega0) << ','
        << num(std::round(r.wall_ms * 1000.0) / 1000.0) << '\n';
  }
}

void write_manifest(std::ostream& out, const SweepDataset& ds, const SweepConfig& cfg) {
  nlohmann::json j;
  j["schema"] = ds.schema;
  j["fingerprint"] = ds.fingerprint;
  j["config"] = cfg.canonical();
  j["columns"] = {"N", "alpha", "cutoff", "dim", "E_vac", "E0", "depletion", "lambda_group", "omega0", "wall_ms"};
  auto& recs = j["records"] = nlohmann::json::array();
  for (const auto& r : ds.records) {
    recs.push_back({{"N", r.N},
                    {"alpha", r.alpha},
                    {"cutoff", r.cutoff},
                    {"dim", r.dim},
                    {"E_vac", finite_or_null(r.E_vac)},
                    {"E0", finite_or_null(r.E0)},
                    {"depletion", finite_or_null(r.depletion)},
                    {"lambda_group", finite_or_null(r.lambda_group)},
                    {"omega0", finite_or_null(r.omega0)},
                    {"wall_ms", std::round(r.wall_ms * 1000.0) / 1000.0},
                    {"ok", r.ok},
                    {"error", r.error},
                    {"lower_bound", finite_or_null(r.lower_bound)},
                    {"lower_C", finite_or_null(r.lower_C)},
                    {"sandwich", r.sandwich},
                    {"residual", r.residual}});
  }
  out << j.dump(2) << '\n';
}

std::vector<EnergyRecord> read_manifest(const std::filesystem::path& path, std::string_view fp) {
  std::vector<EnergyRecord> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return out;
  if (j.value("schema", "") != kSweepSchema || j.value("fingerprint", "") != fp) return out;
  if (!j.contains("records") || !j["records"].is_array()) return out;
  for (const auto& e : j["records"]) {
    EnergyRecord r;
    r.N = e.at("N").get<int>();
    r.alpha = e.at("alpha").get<double>();
    r.cutoff = e.at("cutoff").get<double>();
    r.dim = e.at("dim").get<std::size_t>();
    r.E_vac = number_or_nan(e.at("E_vac"));
    r.E0 = number_or_nan(e.at("E0"));
    r.depletion = number_or_nan(e.at("depletion"));
    r.lambda_group = number_or_nan(e.at("lambda_group"));
    r.omega0 = number_or_nan(e.at("omega0"));
    r.wall_ms = e.at("wall_ms").get<double>();
    r.ok = e.at("ok").get<bool>();
    r.error = e.at("error").get<std::string>();
    r.lower_bound = number_or_nan(e.at("lower_bound"));
    r.lower_C = number_or_nan(e.at("lower_C"));
    r.sandwich = e.at("sandwich").get<bool>();
    r.residual = e.at("residual").get<double>();
    out.push_back(std::move(r));
  }
  return out;
}

VacuumTrajectory vacuum_trajectory(const RadialPotential& pot, double alpha, double ell_prefactor,
                                   const std::vector<int>& Ns) {
  VacuumTrajectory t;
  t.target = 2.0 * pi * alpha;
  if (Ns.empty()) return t;
  const auto lat = build_lattice(2.0 * pi);
  t.points.resize(Ns.size());
  parallel_for(Ns.size(), [&](std::size_t i) {
    GPParameters params{Ns[i], alpha, ell_prefactor};
    params.validate();
    const auto sol = kernel_neumann(pot, params);
    const auto renorm = renormalized_potential(params, sol.mu, sol.log_R, lat);
    auto& p = t.points[i];
    const double n = Ns[i];
    p.N = Ns[i];
    p.omega0 = renorm.omega0;
    p.E_vac = vacuum_upper_bound(params, renorm);
    p.excess = p.E_vac - 2.0 * pi * n;
    p.excess_per_log = p.excess / std::log(n);
    p.omega0_dev = std::fabs(p.omega0 - 4.0 * pi * (1.0 + alpha * std::log(n) / n)) * n;
  });

  if (t.points.size() >= 2) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& p : t.points) {
      const double x = std::log(static_cast<double>(p.N));
      sx += x;
      sy += p.excess;
      sxx += x * x;
      sxy += x * p.excess;
    }
    const double m = static_cast<double>(t.points.size());
    t.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    t.intercept = (sy - t.slope * sx) / m;
    t.relative_slope_error = std::fabs(t.slope - t.target) / t.target;
  }
  t.in_band = std::all_of(t.points.begin(), t.points.end(),
                          [](const TrajectoryPoint& p) { return p.excess_per_log > 0.0 && p.excess_per_log < 30.0; });
  if (t.points.size() >= 3) {
    const auto& q = t.points;
    const double first = std::fabs(q[1].excess_per_log - q[0].excess_per_log);
    const double last = std::fabs(q[q.size() - 1].excess_per_log - q[q.size() - 2].excess_per_log);
    t.flattening = last <= first;
  }
  return t;
}

}  // namespace gp2d
