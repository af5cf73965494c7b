#pragma once

#include "lidx/circle_geometry.hpp"
#include "lidx/propagator.hpp"

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

namespace lidx {

struct FamilySpec {
  std::string kind = "circle";       // circle | constant
  CircleGeometry geometry;
  std::vector<double> eigenvalues;   // constant kind: diagonal H0
};

struct Tolerances {
  double scattering = 0.1;
  double rank = 1e-6;
  double residual = 1e-8;
  double form = 1e-6;
  double eta = 1e-6;
  double step = 1e-8;
  double slope = 0.3;
};

struct ExperimentConfig {
  std::string kind = "index-check";
  unsigned long long seed = 0;
  std::string label;
  FamilySpec family;
  std::vector<int> ladder{32};             // truncation N (modes |n + alpha| <= N/2)
  std::vector<double> horizons{8, 16, 32, 64};
  Tolerances tol;
  std::string scheme = "magnus4";

  // solver checks (index-check)
  int samples = 20;
  int grid_nodes = 201;
  double grid_t_max = 20.0;

  // egorov-bench
  double egorov_t_max = 20.0;
  int egorov_points = 21;
  double chi_width = 0.5;
  double growth_cap = 1.5;

  // eta
  std::vector<double> eta_b{0.1, 0.25, 0.5, 0.9};

  // fredholm-abstract
  std::vector<std::array<int, 3>> dims{{8, 3, 5}};
  int instances = 200;

  std::string out_dir = "out";

  void validate() const;
};

const std::vector<std::string>& experiment_kinds();

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Family at truncation N (circle: N/2 modes each side).
HamiltonianFamily build_family(const FamilySpec& spec, int n);
EvolveOptions evolve_options(const ExperimentConfig& cfg);

}  // namespace lidx
