#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "gp2d/cli.hpp"
#include "gp2d/error.hpp"

using namespace gp2d;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::internal_consistency;
}

std::string message_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("minimal config fills the defaults") {
  const auto cfg = parse_config("potential = step:2,1\nalpha = 3\n");
  CHECK(cfg.cutoff == doctest::Approx(2.0 * std::numbers::pi * 16.0));
  CHECK(cfg.cap == 0);
  CHECK(cfg.cap_for(4) == 4);
  CHECK(cfg.N == std::vector<int>{3, 4, 5});
  CHECK(cfg.fingerprint() == RunConfig{}.fingerprint());
}

TEST_CASE("cap follows the shell") {
  RunConfig cfg;
  cfg.shell = 8;
  CHECK(cfg.cap_for(7) == 5);
  cfg.shell = 12;
  CHECK(cfg.cap_for(7) == 3);
  cfg.cap = 2;
  CHECK(cfg.cap_for(7) == 2);
}

TEST_CASE("constraint violations name the invariant") {
  CHECK(message_of("alpha = -1") == "alpha must be positive");
  CHECK(kind_of("alpha = -1") == ErrorKind::config);
  CHECK(message_of("alpah = 3").find("unknown key 'alpah'") != std::string::npos);
  CHECK(message_of("cutoff = 6").find("cutoff must be at least 2 pi") != std::string::npos);
  CHECK(message_of("N = 1, 3").find("N must be at least 2") != std::string::npos);
  CHECK(message_of("quad_tol = 0").find("quad_tol must be positive") != std::string::npos);
  CHECK(message_of("alpha = 3\nalpha = 4").find("duplicate key") != std::string::npos);
  CHECK(message_of("audits = algebra, magic").find("magic") != std::string::npos);
  CHECK(kind_of("just words") == ErrorKind::config);
}

TEST_CASE("lists, ranges and comments") {
  const auto cfg = parse_config("# header\nsweep_N = 3..6  # inline\nneumann_R = 1e3, 1e5\naudits = algebra\n");
  CHECK(cfg.sweep_N == std::vector<int>{3, 4, 5, 6});
  CHECK(cfg.neumann_R == std::vector<double>{1e3, 1e5});
  CHECK(cfg.audit_selected("algebra"));
  CHECK_FALSE(cfg.audit_selected("ngrow"));
}

TEST_CASE("canonical form round trips") {
  auto cfg = parse_config("potential = bump:3,0.5\nalpha = 2.75\nkernel_N = 8, 9\ncap = 2\nshell = 8\nseed = 99\n");
  const auto again = parse_config(cfg.canonical());
  CHECK(again.canonical() == cfg.canonical());
  CHECK(again.fingerprint() == cfg.fingerprint());
  cfg.out = "elsewhere";
  CHECK(cfg.fingerprint() == again.fingerprint());
  cfg.seed = 100;
  CHECK(cfg.fingerprint() != again.fingerprint());
}

TEST_CASE("output directory precedence") {
  RunConfig cfg;
  cfg.out = "from-config";
  ::unsetenv("GP2D_OUT");
  CHECK(resolve_out_dir(cfg, {}) == fs::path("from-config"));
  ::setenv("GP2D_OUT", "from-env", 1);
  CHECK(resolve_out_dir(cfg, {}) == fs::path("from-env"));
  CHECK(resolve_out_dir(cfg, "from-flag") == fs::path("from-flag"));
  ::unsetenv("GP2D_OUT");
}

TEST_CASE("exit status semantics") {
  RunManifest m;
  CommandStatus c;
  c.command = "scatter";
  c.checks.push_back({"audit", 0.0, 1.0, true, true, ""});
  c.checks.push_back({"diagnostic", 5.0, 1.0, false, false, ""});
  m.commands.push_back(c);
  CHECK(m.audits_passed());
  CHECK(m.exit_status(false) == 0);
  CHECK(m.exit_status(true) != 0);
  m.commands[0].checks[0].pass = false;
  CHECK(m.exit_status(false) != 0);
  m.commands[0].checks[0].pass = true;
  m.commands[0].ok = false;
  CHECK(m.exit_status(false) != 0);
}

TEST_CASE("scatter command reports the closed form scattering length") {
  RunConfig cfg;
  const auto dir = fs::temp_directory_path() / "gp2d-unit-scatter";
  fs::remove_all(dir);
  DispatchOptions opts;
  opts.out = dir;
  const auto m = dispatch("scatter", cfg, opts);
  CHECK(m.exit_status(false) == 0);
  CHECK(m.fingerprint == cfg.fingerprint());
  REQUIRE(m.commands.size() == 1);
  for (const auto& a : m.commands[0].artifacts) CHECK(fs::exists(dir / a));
  CHECK(fs::exists(dir / "run_manifest.json"));

  std::ifstream in(dir / "scatter.json");
  const auto j = nlohmann::json::parse(in);
  const double x = std::sqrt(1.0);
  const double closed = std::exp(-std::cyl_bessel_i(0.0, x) / (x * std::cyl_bessel_i(1.0, x)));
  CHECK(j.at("a").get<double>() == doctest::Approx(closed).epsilon(1e-6));
  fs::remove_all(dir);
}

TEST_CASE("unknown command") {
  CHECK_THROWS_AS(dispatch("bogus", RunConfig{}, DispatchOptions{}), Error);
}

}  // TEST_SUITE
