#include "lidx/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

namespace lidx {

namespace pt = boost::property_tree;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s + ",") {
    if (ch == ',') {
      const auto b = cur.find_first_not_of(" \t");
      const auto e = cur.find_last_not_of(" \t");
      if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' is not a number: '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != static_cast<int>(d)) throw ConfigError("config: '" + key + "' must be an integer");
  return static_cast<int>(d);
}

struct Reader {
  const pt::ptree& tree;
  std::vector<std::string> used;

  std::optional<std::string> get(const std::string& key) {
    used.push_back(key);
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return *v;
    return std::nullopt;
  }
  void num(const std::string& key, double& out) {
    if (auto v = get(key)) out = to_double(key, *v);
  }
  void integer(const std::string& key, int& out) {
    if (auto v = get(key)) out = to_int(key, *v);
  }
  void text(const std::string& key, std::string& out) {
    if (auto v = get(key)) out = *v;
  }
  void num_list(const std::string& key, std::vector<double>& out) {
    if (auto v = get(key)) {
      out.clear();
      for (const auto& s : split_list(*v)) out.push_back(to_double(key, s));
    }
  }
  void int_list(const std::string& key, std::vector<int>& out) {
    if (auto v = get(key)) {
      out.clear();
      for (const auto& s : split_list(*v)) out.push_back(to_int(key, s));
    }
  }
  void profile(const std::string& name, Profile& p, const std::string& kind, double decay) {
    double lo = p.minus, hi = p.plus;
    bool any = false;
    if (auto v = get("family." + name)) {
      lo = hi = to_double(name, *v);
      any = true;
    }
    if (auto v = get("family." + name + "_minus")) { lo = to_double(name + "_minus", *v); any = true; }
    if (auto v = get("family." + name + "_plus")) { hi = to_double(name + "_plus", *v); any = true; }
    if (!any) return;
    p = lo == hi ? Profile::constant(lo) : Profile{kind, lo, hi, decay};
  }
};

bool strictly_increasing(const auto& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

nlohmann::json profile_json(const Profile& p) {
  return {{"kind", p.kind}, {"minus", p.minus}, {"plus", p.plus}, {"decay", p.decay}};
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"index-check", "spectral-flow",     "scattering",
                                          "egorov-bench", "eta",              "fredholm-abstract",
                                          "convergence-study"};
  return k;
}

void ExperimentConfig::validate() const {
  const auto& ks = experiment_kinds();
  if (std::find(ks.begin(), ks.end(), kind) == ks.end())
    throw ConfigError("config: unknown experiment kind '" + kind + "'");
  for (double t : {tol.scattering, tol.rank, tol.residual, tol.form, tol.eta, tol.step, tol.slope})
    if (!(t > 0.0)) throw ConfigError("config: tolerances must be positive");
  if (ladder.empty() || !strictly_increasing(ladder))
    throw ConfigError("config: truncation ladder must be non-empty and strictly increasing");
  if (horizons.empty() || !strictly_increasing(horizons) || !(horizons.front() > 0.0))
    throw ConfigError("config: horizon ladder must be positive and strictly increasing");
  for (int n : ladder)
    if (n < 8 || n % 2) throw ConfigError("config: truncation N must be even and >= 8");
  if (kind == "convergence-study" && ladder.size() < 3)
    throw ConfigError("config: convergence-study needs a truncation ladder of length >= 3");
  if (family.kind == "circle") {
    if (!(family.geometry.delta > 1.0)) throw ConfigError("config: delta must exceed 1");
    try {
      family.geometry.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  } else if (family.kind == "constant") {
    if (family.eigenvalues.empty()) throw ConfigError("config: constant family needs eigenvalues");
  } else {
    throw ConfigError("config: unknown family kind '" + family.kind + "'");
  }
  parse_scheme(scheme);
  if (samples < 0 || grid_nodes < 3 || !(grid_t_max > 0.0))
    throw ConfigError("config: invalid solver grid");
  if (!(egorov_t_max > 0.0) || egorov_points < 2 || !(chi_width > 0.0) || !(growth_cap > 0.0))
    throw ConfigError("config: invalid egorov settings");
  for (double b : eta_b)
    if (!(b > 0.0 && b < 1.0)) throw ConfigError("config: eta offsets must lie in (0, 1)");
  for (const auto& d : dims)
    if (d[0] != d[1] + d[2] || d[0] <= 0 || d[1] < 0 || d[2] <= 0 || d[0] > 32)
      throw ConfigError("config: fredholm dims need dim X = dim Y + dim H <= 32");
  if (instances <= 0) throw ConfigError("config: instances must be positive");
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  Reader r{tree, {}};
  r.text("experiment.kind", c.kind);
  r.text("experiment.label", c.label);
  if (auto v = r.get("experiment.seed")) {
    const int s = to_int("seed", *v);
    if (s < 0) throw ConfigError("config: seed must be non-negative");
    c.seed = static_cast<unsigned long long>(s);
  }
  r.text("family.kind", c.family.kind);
  auto& g = c.family.geometry;
  r.num("family.alpha", g.alpha);
  r.num("family.delta", g.delta);
  std::string kind = "algebraic";
  r.text("family.profile", kind);
  if (kind != "algebraic" && kind != "tanh") throw ConfigError("config: profile must be algebraic or tanh");
  double decay = g.delta;
  r.num("family.profile_decay", decay);
  r.profile("c", g.c, kind, decay);
  r.profile("h", g.h, kind, decay);
  r.profile("a", g.a, kind, decay);
  r.num_list("family.lapse_modes", g.lapse_modes);
  r.profile("lapse_scale", g.lapse_scale, kind, decay);
  r.num("family.bump", g.bump);
  r.num("family.v_amp", g.v_amp);
  r.num_list("family.eigenvalues", c.family.eigenvalues);

  r.int_list("truncation.ladder", c.ladder);
  r.num_list("horizon.ladder", c.horizons);
  r.num("tolerances.scattering_tol", c.tol.scattering);
  r.num("tolerances.rank_tol", c.tol.rank);
  r.num("tolerances.residual_tol", c.tol.residual);
  r.num("tolerances.form_tol", c.tol.form);
  r.num("tolerances.eta_tol", c.tol.eta);
  r.num("tolerances.step_tol", c.tol.step);
  r.num("tolerances.slope_tol", c.tol.slope);
  r.text("propagator.scheme", c.scheme);

  r.integer("solver.samples", c.samples);
  r.integer("solver.grid_nodes", c.grid_nodes);
  r.num("solver.t_max", c.grid_t_max);

  r.num("egorov.t_max", c.egorov_t_max);
  r.integer("egorov.points", c.egorov_points);
  r.num("egorov.chi_width", c.chi_width);
  r.num("egorov.growth_cap", c.growth_cap);

  r.num_list("eta.offsets", c.eta_b);

  if (auto v = r.get("fredholm.dims")) {
    c.dims.clear();
    for (const auto& item : split_list(*v)) {
      std::array<int, 3> d{};
      char x1 = 0, x2 = 0;
      std::istringstream ds(item);
      if (!(ds >> d[0] >> x1 >> d[1] >> x2 >> d[2]) || x1 != 'x' || x2 != 'x')
        throw ConfigError("config: fredholm dims must look like 8x3x5");
      c.dims.push_back(d);
    }
  }
  r.integer("fredholm.instances", c.instances);
  r.text("output.dir", c.out_dir);

  // unknown keys are errors, typos should not pass silently
  for (const auto& sec : tree)
    for (const auto& kv : sec.second) {
      const std::string key = sec.first + "." + kv.first;
      if (std::find(r.used.begin(), r.used.end(), key) == r.used.end())
        throw ConfigError("config: unknown key '" + key + "'");
    }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  const auto& g = c.family.geometry;
  nlohmann::json fam = {{"kind", c.family.kind}};
  if (c.family.kind == "circle") {
    fam["alpha"] = g.alpha;
    fam["delta"] = g.delta;
    fam["c"] = profile_json(g.c);
    fam["h"] = profile_json(g.h);
    fam["a"] = profile_json(g.a);
    fam["lapse_modes"] = g.lapse_modes;
    fam["lapse_scale"] = profile_json(g.lapse_scale);
    fam["bump"] = g.bump;
    fam["v_amp"] = g.v_amp;
  } else {
    fam["eigenvalues"] = c.family.eigenvalues;
  }
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : c.dims) dims.push_back({d[0], d[1], d[2]});
  return {
      {"kind", c.kind},
      {"label", c.label},
      {"seed", c.seed},
      {"family", fam},
      {"truncation_ladder", c.ladder},
      {"horizon_ladder", c.horizons},
      {"tolerances",
       {{"scattering_tol", c.tol.scattering},
        {"rank_tol", c.tol.rank},
        {"residual_tol", c.tol.residual},
        {"form_tol", c.tol.form},
        {"eta_tol", c.tol.eta},
        {"step_tol", c.tol.step},
        {"slope_tol", c.tol.slope}}},
      {"scheme", c.scheme},
      {"solver", {{"samples", c.samples}, {"grid_nodes", c.grid_nodes}, {"t_max", c.grid_t_max}}},
      {"egorov",
       {{"t_max", c.egorov_t_max},
        {"points", c.egorov_points},
        {"chi_width", c.chi_width},
        {"growth_cap", c.growth_cap}}},
      {"eta", {{"offsets", c.eta_b}}},
      {"fredholm", {{"dims", dims}, {"instances", c.instances}}},
      {"output_dir", c.out_dir},
  };
}

HamiltonianFamily build_family(const FamilySpec& spec, int n) {
  if (spec.kind == "constant") {
    const int d = static_cast<int>(spec.eigenvalues.size());
    RVec ev(d);
    for (int i = 0; i < d; ++i) ev(i) = spec.eigenvalues[i];
    HamiltonianFamily f = HamiltonianFamily::constant(ev.cast<cplx>().asDiagonal().toDenseMatrix());
    f.label = "constant";
    return f;
  }
  return build_circle_family(spec.geometry, n / 2);
}

EvolveOptions evolve_options(const ExperimentConfig& cfg) {
  EvolveOptions o;
  o.tol = cfg.tol.step;
  o.scheme = parse_scheme(cfg.scheme);
  return o;
}

}  // namespace lidx
