#include "lidx/experiments.hpp"

#include "fixtures.hpp"

#include <filesystem>
#include <fstream>

using namespace lidx;

namespace {

const char* kTwisted = R"(
[experiment]
kind = spectral-flow
seed = 3

[family]
kind = circle
alpha = 0.5
delta = 2
a_minus = 0.25
a_plus = 2.25

[truncation]
ladder = 16, 32
)";

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parses profiles and ladders") {
  const ExperimentConfig c = parse_config(kTwisted);
  CHECK(c.kind == "spectral-flow");
  CHECK(c.ladder == std::vector<int>{16, 32});
  CHECK(c.family.geometry.a.minus == 0.25);
  CHECK(c.family.geometry.a.kind == "algebraic");
  CHECK(c.family.geometry.h.is_constant());
}

TEST_CASE("config validation errors") {
  CHECK_THROWS_AS(parse_config("[family]\ndelta = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[family]\ndelta = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[truncation]\nladder = 32, 16\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[tolerances]\nrank_tol = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[family]\nalpah = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = convergence-study\n[truncation]\nladder = 16, 32\n"),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/x.ini"), ConfigError);
}

TEST_CASE("spectral-flow experiment on the twisted family") {
  const ExperimentResult r = run_experiment(parse_config(kTwisted));
  CHECK(r.pass);
  CHECK(r.report["results"]["ladder"][0]["sf"] == 2);
  CHECK(r.csv.count("tracks_N16.csv") == 1);
}

TEST_CASE("spectral-flow on a constant family is zero") {
  const ExperimentResult r =
      run_experiment(parse_config("[experiment]\nkind = spectral-flow\n[family]\nkind = constant\neigenvalues = -1, 2\n"));
  CHECK(r.pass);
  CHECK(r.report["results"]["ladder"][0]["sf"] == 0);
}

TEST_CASE("convergence study on a constant family has vanishing residuals") {
  const ExperimentConfig c = parse_config(
      "[experiment]\nkind = convergence-study\n[family]\nkind = constant\neigenvalues = -1, 0.5, 2\n"
      "[truncation]\nladder = 8, 16, 32\n[egorov]\npoints = 5\n");
  const ExperimentResult r = run_experiment(c);
  CHECK(r.pass);
  for (const auto& row : r.report["results"]["ladder"])
    for (double x : row["moller_plus"]["residuals"]) CHECK(x <= 1e-10);
}

TEST_CASE("reports are deterministic and errors are structured") {
  const auto dir = std::filesystem::temp_directory_path() / "lidx_unit_report";
  std::filesystem::remove_all(dir);
  const ExperimentConfig c = parse_config("[experiment]\nkind = fredholm-abstract\nseed = 5\n[fredholm]\ninstances = 10\n");
  CHECK(run_and_write(c, (dir / "a").string(), 1, false) == 0);
  CHECK(run_and_write(c, (dir / "b").string(), 2, false) == 0);
  CHECK(read(dir / "a" / "report.json") == read(dir / "b" / "report.json"));
  CHECK(read(dir / "a" / "instances.csv") == read(dir / "b" / "instances.csv"));

  ExperimentConfig bad = parse_config(kTwisted);
  bad.kind = "scattering";
  bad.horizons = {2, 4};
  bad.tol.scattering = 1e-9;
  bad.ladder = {16};
  // the scattering kind reports the full ladder, so force an error through a module instead
  bad.family.geometry.delta = 0.5;
  CHECK(run_and_write(bad, (dir / "c").string(), 1, false) == 2);
  const auto err = nlohmann::json::parse(read(dir / "c" / "report.json"));
  CHECK(err["pass"] == false);
  CHECK(err["error"]["kind"] == "config_error");
}
