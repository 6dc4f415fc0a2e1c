#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "gp2d/cli.hpp"
#include "gp2d/error.hpp"

namespace gp2d {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw Error(ErrorKind::config, key + ": '" + v + "' is not a number");
  }
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw Error(ErrorKind::config, key + ": '" + v + "' is not an integer");
  }
  return x;
}

std::vector<int> int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  if (v.empty()) return out;
  for (const auto& item : split(v, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(static_cast<int>(to_int(key, item)));
      continue;
    }
    const auto lo = to_int(key, trim(item.substr(0, dots)));
    const auto hi = to_int(key, trim(item.substr(dots + 2)));
    if (hi < lo) throw Error(ErrorKind::config, key + ": empty range '" + item + "'");
    if (hi - lo > 10000) throw Error(ErrorKind::config, key + ": range '" + item + "' is too long");
    for (auto n = lo; n <= hi; ++n) out.push_back(static_cast<int>(n));
  }
  return out;
}

std::vector<double> double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (v.empty()) return out;
  for (const auto& item : split(v, ',')) out.push_back(to_double(key, item));
  return out;
}


std::string num(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += f(xs[i]);
  }
  return s;
}

}  // namespace

const std::vector<std::string>& known_audits() {
  static const std::vector<std::string> names{"algebra", "ngrow", "angrow", "expahn", "localization", "condensation",
                                              "gn-shape"};
  return names;
}

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> names{"scatter", "neumann", "kernels", "fock-audit",
                                              "lower-bound", "energy-sweep", "all"};
  return names;
}

int RunConfig::cap_for(int n) const {
  const int by_shell = cap > 0 ? cap : (shell == 4 ? n : (shell == 8 ? 5 : 3));
  return std::min(by_shell, n);
}

bool RunConfig::audit_selected(std::string_view name) const {
  return std::find(audits.begin(), audits.end(), name) != audits.end();
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::config, what); };
  if (trim(potential).empty()) fail("potential must not be empty");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be positive");
  auto check_N = [&](const std::vector<int>& v, const char* key) {
    for (const int n : v) {
      if (n < 2) fail(std::string(key) + ": N must be at least 2");
    }
  };
  check_N(N, "N");
  check_N(kernel_N, "kernel_N");
  check_N(scalar_N, "scalar_N");
  check_N(sweep_N, "sweep_N");
  for (const double r : neumann_R) {
    if (!(r > 0.0) || !std::isfinite(r)) fail("neumann_R: radii must be positive");
  }
  if (!(cutoff >= 2.0 * std::numbers::pi) || !std::isfinite(cutoff)) fail("cutoff must be at least 2 pi");
  if (!(ell_prefactor > 0.0)) fail("ell_prefactor must be positive");
  if (shell != 4 && shell != 8 && shell != 12) fail("shell must be 4, 8 or 12");
  if (cap < 0) fail("cap must be non-negative");
  if (!(quad_tol > 0.0)) fail("quad_tol must be positive");
  if (!(eig_tol > 0.0)) fail("eig_tol must be positive");
  if (!(psd_tol > 0.0)) fail("psd_tol must be positive");
  if (!(condensation_c > 0.0)) fail("condensation_c must be positive");
  for (const auto& a : audits) {
    if (std::find(known_audits().begin(), known_audits().end(), a) == known_audits().end()) {
      fail("audits: unknown audit '" + a + "'");
    }
  }
}

std::string RunConfig::canonical() const {
  auto itos = [](int n) { return std::to_string(n); };
  std::ostringstream os;
  os << "potential = " << potential << "\n"
     << "alpha = " << num(alpha) << "\n"
     << "N = " << join(N, itos) << "\n"
     << "kernel_N = " << join(kernel_N, itos) << "\n"
     << "scalar_N = " << join(scalar_N, itos) << "\n"
     << "sweep_N = " << join(sweep_N, itos) << "\n"
     << "neumann_R = " << join(neumann_R, num) << "\n"
     << "cutoff = " << num(cutoff) << "\n"
     << "ell_prefactor = " << num(ell_prefactor) << "\n"
     << "shell = " << shell << "\n"
     << "cap = " << cap << "\n"
     << "quad_tol = " << num(quad_tol) << "\n"
     << "eig_tol = " << num(eig_tol) << "\n"
     << "psd_tol = " << num(psd_tol) << "\n"
     << "condensation_c = " << num(condensation_c) << "\n"
     << "seed = " << seed << "\n"
     << "audits = " << join(audits, [](const std::string& s) { return s; }) << "\n"
     << "out = " << out << "\n";
  return os.str();
}

std::string RunConfig::fingerprint() const {
  std::string text = canonical();
  text.erase(text.rfind("out = "));
  return gp2d::fingerprint(text);
}

SweepConfig RunConfig::sweep_config() const {
  SweepConfig s;
  s.potential = potential;
  s.N_values = sweep_N;
  s.alphas = {alpha};
  s.cutoff = cutoff;
  s.ell_prefactor = ell_prefactor;
  s.shell = shell;
  s.cap = cap > 0 ? cap : (shell == 4 ? 0 : (shell == 8 ? 5 : 3));
  s.condensation_c = condensation_c;
  s.lower_bound = true;
  s.eig_tol = eig_tol;
  s.quad_tol = quad_tol;
  s.seed = seed;
  return s;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw Error(ErrorKind::config, "duplicate key '" + key + "'");

    if (key == "potential") cfg.potential = v;
    else if (key == "alpha") cfg.alpha = to_double(key, v);
    else if (key == "N") cfg.N = int_list(key, v);
    else if (key == "kernel_N") cfg.kernel_N = int_list(key, v);
    else if (key == "scalar_N") cfg.scalar_N = int_list(key, v);
    else if (key == "sweep_N") cfg.sweep_N = int_list(key, v);
    else if (key == "neumann_R") cfg.neumann_R = double_list(key, v);
    else if (key == "cutoff") cfg.cutoff = to_double(key, v);
    else if (key == "ell_prefactor") cfg.ell_prefactor = to_double(key, v);
    else if (key == "shell") cfg.shell = static_cast<int>(to_int(key, v));
    else if (key == "cap") cfg.cap = static_cast<int>(to_int(key, v));
    else if (key == "quad_tol") cfg.quad_tol = to_double(key, v);
    else if (key == "eig_tol") cfg.eig_tol = to_double(key, v);
    else if (key == "psd_tol") cfg.psd_tol = to_double(key, v);
    else if (key == "condensation_c") cfg.condensation_c = to_double(key, v);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(key, v));
    else if (key == "out") cfg.out = v;
    else if (key == "audits") cfg.audits = v.empty() ? std::vector<std::string>{} : split(v, ',');
    else throw Error(ErrorKind::config, "unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::filesystem::path resolve_out_dir(const RunConfig& cfg, const std::filesystem::path& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("GP2D_OUT"); env && *env) return env;
  return cfg.out;
}

}  // namespace gp2d
