// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include "lidx/aps_solver.hpp"
#include "lidx/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>

using namespace lidx;
using json = nlohmann::json;

namespace {

const std::string kConfigs = std::string(LIDX_SOURCE_DIR) + "/configs/";

ExperimentResult run(const std::string& name, int jobs = 1) {
  return run_experiment(load_config(kConfigs + name), jobs);
}

std::string failed_checks(const json& report) {
  std::string s;
  for (const auto& c : report["checks"])
    if (!c["pass"].get<bool>()) s += " [" + c["name"].get<std::string>() + "]";
  return s;
}

struct Line {
  bool pass = false;
  std::string detail;
};

Line triangle(const std::string& cfg, int expected) {
  const ExperimentResult r = run(cfg);
  const json& e = r.report["results"]["ladder"][0];
  const int block = e["index_block"], sfk = e["sf_minus_ker_plus"];
  const double rhs = e.value("aps_rhs", 1e9);
  const bool ok = r.pass && block == expected && sfk == expected && std::abs(rhs - expected) < 1e-9;
  char buf[160];
  std::snprintf(buf, sizeof buf, "block=%d sf-ker=%d rhs=%.12g", block, sfk, rhs);
  return {ok, buf + failed_checks(r.report)};
}

Line criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Line l = triangle("c01_index_untwisted_alpha0.ini", -1);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  l.pass = l.pass && secs < 120.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, " runtime=%.1fs", secs);
  l.detail += buf;
  return l;
}

Line criterion3() {
  const ExperimentResult r = run("c03_twisted_flow.ini");
  bool ok = r.pass && r.report["results"]["ladder"].size() == 2;
  std::string d;
  for (const auto& e : r.report["results"]["ladder"]) {
    ok = ok && e["sf"] == 2 && e["index_strict_block"] == 2 && e["sf_oracle"] == 2 && !e["gray_zone"].get<bool>();
    d += "N=" + std::to_string(e["N"].get<int>()) + " sf=" + std::to_string(e["sf"].get<int>()) +
         " block=" + std::to_string(e["index_strict_block"].get<int>()) + " ";
  }
  return {ok, d + failed_checks(r.report)};
}

Line criterion4() {
  const ExperimentResult r = run("c04_eta.ini");
  const double e = eta_invariant(0.25, EtaMethod::partial_sum_zeta).value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "eta(0.25)=%.12f", e);
  return {r.pass && std::abs(e - 0.5) <= 1e-6, buf + failed_checks(r.report)};
}

Line from_report(const std::string& cfg) {
  const ExperimentResult r = run(cfg);
  return {r.pass, std::to_string(r.report["checks"].size()) + " checks" + failed_checks(r.report)};
}

Line criterion7() {
  const ExperimentResult r = run("c07_positivity.ini");
  const json& p = r.report["results"]["solver"]["positivity"];
  const bool ok = r.pass && p.value("samples", 0) == 100;
  char buf[160];
  std::snprintf(buf, sizeof buf, "min form=%.3g max rel mismatch=%.3g", p.value("min_form", 0.0),
                p.value("max_relative_mismatch", 1.0));
  return {ok, buf + failed_checks(r.report)};
}

Line criterion9() {
  double rt = 0.0, comp = 0.0, drift = 0.0;
  int families = 0;
  bool ok = true;
  for (const auto& ent : std::filesystem::directory_iterator(kConfigs)) {
    const ExperimentConfig c = load_config(ent.path().string());
    if (c.kind == "fredholm-abstract" || c.kind == "eta") continue;
    ++families;
    const HamiltonianFamily fam = build_family(c.family, std::min(c.ladder.front(), 16));
    const EvolveOptions eo = evolve_options(c);
    const DiscreteEvolution ev(fam, make_time_grid(20.0, 161), eo);
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> nd;
    for (int s = 0; s < 3; ++s) {
      const TimeGridFunction f = random_function(ev, 100 + s, 0.0);
      Vec v(fam.dim);
      for (int i = 0; i < fam.dim; ++i) v(i) = cplx(nd(rng), nd(rng));
      for (int dir : {-1, 1}) {
        const TimeGridFunction u = solve_from_data(ev, v, f, dir);
        rt = std::max(rt, (asymptotic_data(ev, u, f, dir) - v).norm() / v.norm());
      }
    }
    const double cr = composition_residual(fam, -3.0, 1.0, 5.0, eo);
    comp = std::max(comp, cr);
    ok = ok && cr <= 10.0 * c.tol.step;
    if (fam.t_constant && !fam.has_v()) {
      const IsometryReport iso = check_l2t_isometry(fam, evolve(fam, -4.0, 6.0, eo), 1e-8);
      drift = std::max(drift, iso.drift_per_time);
      ok = ok && iso.drift_per_time <= 1e-8;
    }
  }
  ok = ok && rt <= 1e-8 && families > 0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d families: round trip=%.2g composition=%.2g drift/time=%.2g", families, rt,
                comp, drift);
  return {ok, buf};
}

Line criterion10() {
  const ExperimentConfig c = load_config(kConfigs + "c10_determinism.ini");
  const ExperimentResult a = run_experiment(c, 1), b = run_experiment(c, 1), p = run_experiment(c, 4);
  const bool same = dump_report(a.report) == dump_report(b.report) && a.csv == b.csv;
  const bool same_par = dump_report(a.report) == dump_report(p.report) && a.csv == p.csv;
  return {same && same_par, std::string("repeat ") + (same ? "identical" : "differs") + ", 4 workers " +
                                (same_par ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Line()>>> criteria = {
      {"index triangle, periodic metric family", criterion1},
      {"index triangle, antiperiodic metric family",
       [] { return triangle("c02_index_untwisted_alpha_half.ini", 0); }},
      {"spectral flow equals strict block index", criterion3},
      {"eta oracle", criterion4},
      {"Moller residual decay", [] { return from_report("c05_moller.ini"); }},
      {"Egorov defect growth", [] { return from_report("c06_egorov.ini"); }},
      {"parametrix positivity", criterion7},
      {"finite Fredholm brute force", [] { return from_report("c08_fredholm.ini"); }},
      {"solver round trips", criterion9},
      {"determinism", criterion10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Line l;
    try {
      l = criteria[i].second();
    } catch (const std::exception& e) {
      l = {false, std::string("error: ") + e.what()};
    }
    failures += !l.pass;
    std::printf("%s criterion %zu (%s): %s\n", l.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                l.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
