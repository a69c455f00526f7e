#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "starreg/cli/bundle.hpp"
#include "starreg/cli/config.hpp"
#include "starreg/cli/runner.hpp"

using namespace starreg;
using namespace starreg::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const double kPi = std::numbers::pi;

json basis_doc(const std::string& mode, int n) {
  json atoms = json::array();
  for (int k = 0; k < 4; ++k) atoms.push_back({{"angle", k * kPi / 2}, {"mass", 0.25}});
  return {{"schema", 1}, {"mode", mode}, {"name", "out"}, {"grid", {{"n", n}}}, {"data", {{"atoms", atoms}}}};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("starreg_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STARREG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump();
  return p;
}

}  // namespace

TEST_CASE("config parsing rejects malformed documents") {
  json doc = basis_doc("dro", 8);
  doc["eps"] = 0.1;
  CHECK_NOTHROW(parse_config(doc));
  json extra = doc;
  extra["surprise"] = true;
  CHECK_THROWS_AS(parse_config(extra), ConfigError);
  json schema = doc;
  schema["schema"] = 2;
  CHECK_THROWS_AS(parse_config(schema), ConfigError);
  json missing = doc;
  missing.erase("eps");
  CHECK_THROWS_AS(parse_config(missing), ConfigError);
  json negative = doc;
  negative["eps"] = -0.1;
  CHECK_THROWS_AS(parse_config(negative), ConfigError);
  json nested = doc;
  nested["data"]["atoms"][0]["colour"] = 1;
  CHECK_THROWS_AS(parse_config(nested), ConfigError);
  json density = basis_doc("dro", 8);
  density["eps"] = 0.1;
  density["data"] = {{"density", "gaussian"}};
  CHECK_THROWS_AS(parse_config(density), ConfigError);
  json conv = basis_doc("convergence", 8);
  conv["data"] = {{"density", "laplace-l1"}};
  conv["n_list"] = {32, 16};
  CHECK_THROWS_AS(parse_config(conv), ConfigError);
}

TEST_CASE("config hash is stable and key-order independent") {
  const json a = json::parse(R"({"schema":1,"mode":"star0","grid":{"n":8},"data":{"density":"laplace-l1"}})");
  const json b = json::parse(R"({"data":{"density":"laplace-l1"},"grid":{"n":8},"mode":"star0","schema":1})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  json c = a;
  c["grid"]["n"] = 9;
  CHECK(config_hash(a) != config_hash(c));
  RunOptions o;
  o.tol = 1e-6;
  CHECK(config_hash(apply_overrides(a, o)) != config_hash(a));
}

TEST_CASE("random data specs are reproducible from the seed") {
  DistributionSpec spec;
  spec.kind = DistributionSpec::Kind::Random;
  spec.count = 5;
  const AtomicDistribution a = materialize(spec, 42), b = materialize(spec, 42), c = materialize(spec, 43);
  CHECK(a.points() == b.points());
  CHECK(a.points() != c.points());
}

TEST_CASE("CSV roundtrip") {
  const fs::path dir = scratch("csv");
  std::vector<double> t{1.0 / 3.0, std::sqrt(2.0), kPi, 1e-7 + 1.0};
  const StarBody k(make_uniform_grid(4), t);
  ResultBundle b = make_bundle("star0", k);
  b.objective = 0.1;
  export_csv(b, dir / "b.csv");
  const std::string text = slurp(dir / "b.csv");
  CHECK(text.rfind("angle_rad,t,rho\n", 0) == 0);
  const ResultBundle back = read_bundle(dir / "b.csv");
  REQUIRE(back.t.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(back.t[i] - t[i]) <= 1e-15 * t[i]);
    CHECK(std::abs(back.angle[i] - b.angle[i]) <= 1e-15);
  }
  CHECK(back.objective.value() == 0.1);
  CHECK(!back.s.has_value());
  const json side = json::parse(slurp(dir / "b.json"));
  for (const char* key : {"objective", "s", "gap", "volume", "lipschitz", "iterations"}) CHECK(side.contains(key));
}

TEST_CASE("SVG of the l1 hull is a rotated square") {
  const StarBody l1(make_uniform_grid(4), std::vector<double>(4, std::sqrt(2.0)), BodyKind::HullPolytope);
  const ResultBundle b = make_bundle("convex", l1);
  for (double r : b.rho) CHECK(r == doctest::Approx(1 / std::sqrt(2.0)));
  const std::string svg = svg_text(b);
  // 0.8 * 400 = 320 pixels for the largest radius, vertices on the axes.
  CHECK(svg.find("720.0000,400.0000 400.0000,80.0000 80.0000,400.0000 400.0000,720.0000") != std::string::npos);
  CHECK(svg == svg_text(b));
  CHECK(svg.find("width=\"800\"") != std::string::npos);
}

TEST_CASE("SVG of a disk is a regular polygon of arcs") {
  const StarBody disk(make_uniform_grid(6), std::vector<double>(6, std::sqrt(kPi)));
  const std::string svg = svg_text(make_bundle("star0", disk));
  CHECK(svg.find("720.0000,400.0000") != std::string::npos);
}

TEST_CASE("runner writes deterministic outputs") {
  const fs::path dir = scratch("runner");
  json doc = basis_doc("dro", 16);
  doc["eps"] = 0.1;
  doc["cost"] = "arc";
  RunOptions o;
  o.out_dir = dir;
  const RunReport r1 = run_config(parse_config(doc), o);
  const std::string csv1 = slurp(dir / "out.csv"), svg1 = slurp(dir / "out.svg"), js1 = slurp(dir / "out.json");
  const RunReport r2 = run_config(parse_config(doc), o);
  CHECK(csv1 == slurp(dir / "out.csv"));
  CHECK(svg1 == slurp(dir / "out.svg"));
  CHECK(js1 == slurp(dir / "out.json"));
  CHECK(r1.config_hash == r2.config_hash);
  CHECK(fs::exists(dir / "out.provenance.json"));
}

TEST_CASE("sweep writes one bundle per eps and an index") {
  const fs::path dir = scratch("sweep");
  json doc = basis_doc("sweep", 8);
  doc["eps_list"] = {0.05, 0.5};
  RunOptions o;
  o.out_dir = dir;
  o.write_svg = false;
  run_config(parse_config(doc), o);
  CHECK(fs::exists(dir / "out_eps0.csv"));
  CHECK(fs::exists(dir / "out_eps1.csv"));
  const json index = json::parse(slurp(dir / "out_index.json"));
  CHECK(index.at("entries").size() == 2);
}

TEST_CASE("convex config reproduces the l1 ball") {
  const fs::path dir = scratch("convex");
  RunOptions o;
  o.out_dir = dir;
  const RunReport r = run_config(parse_config(basis_doc("convex", 4)), o);
  REQUIRE(r.bundles.size() == 1);
  for (double t : r.bundles[0].t) CHECK(std::abs(t - std::sqrt(2.0)) <= 1e-6);
}

TEST_CASE("shift bench with zero shift") {
  DistributionSpec spec;
  const AtomicDistribution p({{unit_vector(0.0), 0.5}, {unit_vector(2.0), 0.3}, {unit_vector(4.0), 0.2}});
  const std::vector<ShiftBenchRow> rows = shift_bench(p, 1, std::vector<double>{0.0, 0.1}, make_uniform_grid(12));
  CHECK(rows[0].gauge_diff == 0.0);
  CHECK(rows[0].w1 == doctest::Approx(0.0).scale(1.0));
  CHECK(rows[1].holds);
}

TEST_CASE("process exit codes") {
  const fs::path dir = scratch("exit");
  const std::string out = " --out-dir " + dir.string();

  json ok = basis_doc("convex", 8);
  CHECK(run_cli("run " + write_config(dir, ok).string() + out) == 0);
  CHECK(run_cli("render " + (dir / "out.csv").string() + " -o " + (dir / "r.svg").string()) == 0);
  CHECK(slurp(dir / "r.svg") == slurp(dir / "out.svg"));

  CHECK(run_cli("run " + (dir / "missing.json").string() + out) == 2);
  json bad = ok;
  bad["bogus"] = 1;
  CHECK(run_cli("run " + write_config(dir, bad).string() + out) == 2);

  json empty = basis_doc("star0", 8);
  CHECK(run_cli("run " + write_config(dir, empty).string() + out) == 3);

  json critic = basis_doc("critic", 8);
  critic["data_q"] = {{"density", "uniform-circle"}};
  critic["eps_ball"] = 2.0;
  CHECK(run_cli("run " + write_config(dir, critic).string() + out) == 3);

  json capped = basis_doc("dro", 8);
  capped["eps"] = 0.1;
  CHECK(run_cli("run " + write_config(dir, capped).string() + out + " --max-iters 2") == 4);

  CHECK(run_cli("sweep " + write_config(dir, ok).string() + out) == 2);
  CHECK(run_cli("frobnicate") == 2);
}
