#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "gp2d/energy.hpp"

using namespace gp2d;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gp2d-unit-" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("energy_report") {

TEST_CASE("vacuum bound with omega0 = 4 pi") {
  RenormPotential r;
  r.omega0 = 4.0 * pi;
  for (int N : {2, 7, 40}) CHECK(vacuum_upper_bound(GPParameters{N, 3.0, 1.0}, r) == doctest::Approx(2.0 * pi * (N - 1)));
}

TEST_CASE("ground state of the kinetic energy is the vacuum") {
  const auto basis = build_basis(shell_modes(4), 3);
  const auto K = hamiltonian_pieces(basis, RadialPotential::zero()).K;
  for (std::size_t cap : {std::size_t{4000}, std::size_t{0}}) {
    CAPTURE(cap);
    const auto gs = ground_state(K, basis, cap);
    CHECK(gs.dense == (cap > 0));
    CHECK(std::fabs(gs.energy) <= 1e-9);
    CHECK(std::abs(gs.vector.amplitudes[0]) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(gs.depletion <= 1e-9);
  }
}

TEST_CASE("dense and Lanczos ground states agree") {
  const auto basis = build_basis(shell_modes(4), 4);
  const auto L = hamiltonian_pieces(basis, RadialPotential::step(2.0, 1.0)).L;
  const auto a = ground_state(L, basis);
  const auto b = ground_state(L, basis, 0);
  CHECK(b.energy == doctest::Approx(a.energy).epsilon(1e-9));
  CHECK(b.depletion == doctest::Approx(a.depletion).epsilon(1e-6));
}

TEST_CASE("fingerprint is FNV-1a") {
  CHECK(fingerprint("") == "cbf29ce484222325");
  CHECK(fingerprint("a") == "af63dc4c8601ec8c");
  CHECK(fingerprint("N = 3") != fingerprint("N = 4"));
}

TEST_CASE("one sweep record") {
  SweepConfig cfg;
  const auto r = compute_record(cfg, 4, 3.0);
  CHECK(r.ok);
  CHECK(r.sandwich);
  CHECK(r.lower_bound <= r.E0 + 1e-8);
  CHECK(r.E0 <= r.E_vac + 1e-8);
  CHECK(r.depletion >= 0.0);
  CHECK(r.depletion <= 1.0);
  CHECK(r.dim == 70);
  CHECK(r.E_vac == doctest::Approx(0.5 * r.omega0 * 3.0));
}

TEST_CASE("empty sweep still writes a valid dataset") {
  SweepConfig cfg;
  cfg.N_values.clear();
  const auto dir = scratch("empty");
  const auto ds = sweep(cfg, dir);
  CHECK(ds.records.empty());
  CHECK(ds.schema == kSweepSchema);
  CHECK(slurp(dir / "energy_sweep.csv") == "N,alpha,cutoff,dim,E_vac,E0,depletion,lambda_group,omega0,wall_ms\n");
  const auto j = nlohmann::json::parse(slurp(dir / "energy_sweep.json"));
  CHECK(j.at("schema") == std::string(kSweepSchema));
  CHECK(j.at("fingerprint") == ds.fingerprint);
  CHECK(j.at("records").empty());
  fs::remove_all(dir);
}

TEST_CASE("rerunning a finished sweep recomputes nothing") {
  SweepConfig cfg;
  cfg.N_values = {3, 4};
  cfg.lower_bound = false;
  const auto dir = scratch("resume");
  const auto first = sweep(cfg, dir);
  CHECK(first.computed == 2);
  const auto csv = slurp(dir / "energy_sweep.csv");
  const auto manifest = slurp(dir / "energy_sweep.json");

  const auto second = sweep(cfg, dir);
  CHECK(second.computed == 0);
  CHECK(second.skipped == 2);
  CHECK(slurp(dir / "energy_sweep.csv") == csv);
  CHECK(slurp(dir / "energy_sweep.json") == manifest);

  // a different configuration does not reuse the records
  cfg.condensation_c = 0.2;
  CHECK(read_manifest(dir / "energy_sweep.json", fingerprint(cfg.canonical())).empty());
  fs::remove_all(dir);
}

TEST_CASE("records come out sorted") {
  SweepConfig cfg;
  cfg.N_values = {5, 3};
  cfg.lower_bound = false;
  const auto ds = sweep(cfg, {});
  REQUIRE(ds.records.size() == 2);
  CHECK(ds.records[0].N == 3);
  CHECK(ds.records[1].N == 5);
}

TEST_CASE("vacuum trajectory") {
  const auto tr = vacuum_trajectory(RadialPotential::step(2.0, 1.0), 3.0, 1.0, {10, 20, 30});
  REQUIRE(tr.points.size() == 3);
  CHECK(tr.target == doctest::Approx(6.0 * pi));
  for (const auto& p : tr.points) {
    CHECK(p.E_vac == doctest::Approx(0.5 * p.omega0 * (p.N - 1)));
    CHECK(p.excess == doctest::Approx(p.E_vac - 2.0 * pi * p.N));
  }
  CHECK(std::isfinite(tr.slope));
}

}  // TEST_SUITE
