#pragma once

#include "lidx/propagator.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace lidx {

/// chi(x) = (1 + tanh(x / w)) / 2
struct SmoothStep {
  double width = 0.5;
  double operator()(double x) const { return 0.5 * (1.0 + std::tanh(x / width)); }
};

/// E(t) = U(t,0) chi(H(0)) U(0,t) - chi(H(t)), given U(t,0).
Mat heisenberg_defect(const HamiltonianFamily& fam, const SmoothStep& chi, double t, const Mat& u_t0);
Mat heisenberg_defect(const HamiltonianFamily& fam, const SmoothStep& chi, double t,
                      const EvolveOptions& opt = {});

struct DefectRow {
  int n = 0;
  double t = 0.0;
  double raw = 0.0;       // ||E(t)|| in L2_t
  double weighted = 0.0;  // ||E(t) Lambda(t)|| in L2_t
  double conservation = 0.0;  // ||U(0,t)(chi(H(t)) + E(t))U(t,0) - chi(H(0))||
};

struct DefectReport {
  std::vector<DefectRow> rows;
  std::map<int, double> sup_raw, sup_weighted;
  std::map<int, double> proxy_k1, proxy_k2;   // at the largest |t|
  std::vector<double> growth_ratios;          // between consecutive ladder entries
  double growth_floor = 1e-10;
  double growth_cap = 1.5;
  bool pass = false;
};

using FamilyBuilder = std::function<HamiltonianFamily(int)>;

DefectReport defect_study(const FamilyBuilder& build, const SmoothStep& chi,
                          const std::vector<double>& t_grid, const std::vector<int>& n_ladder,
                          const EvolveOptions& opt = {}, double growth_cap = 1.5, int jobs = 1);

std::string defect_csv(const DefectReport& r);

}  // namespace lidx
