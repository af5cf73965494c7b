#include "lidx/egorov.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

namespace lidx {

namespace {

Mat chi_of(const HamiltonianFamily& fam, const SmoothStep& chi, double t) {
  return apply_function(assemble_snapshot(fam, t, false), chi);
}

// operator norm on L2_t
double norm_t(const HamiltonianFamily& fam, double t, const Mat& a) {
  if (!fam.t_at) return op_norm(a);
  return op_norm(fam.similarity_inv(t) * a * fam.similarity(t));
}

struct Cell {
  std::vector<DefectRow> rows;
  double proxy1 = 0.0, proxy2 = 0.0;
};

Cell run_ladder_entry(const HamiltonianFamily& fam, int n, const SmoothStep& chi,
                      const std::vector<double>& t_grid, const EvolveOptions& opt) {
  Cell c;
  const Mat chi0 = chi_of(fam, chi, 0.0);
  const EigenSystem es0 = assemble_snapshot(fam, 0.0, false);
  const Mat lam0 = lambda_operator(es0);
  std::vector<double> pos, neg;
  for (double t : t_grid) (t >= 0 ? pos : neg).push_back(t);
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end(), std::greater<>());
  const double tmax = std::max(pos.empty() ? 0.0 : pos.back(), neg.empty() ? 0.0 : -neg.back());

  for (const auto* side : {&neg, &pos}) {
    Mat u = Mat::Identity(fam.dim, fam.dim);  // U(t,0)
    double prev = 0.0;
    for (double t : *side) {
      if (t != prev) u = evolve(fam, prev, t, opt).u * u;
      prev = t;
      const Eigen::PartialPivLU<Mat> lu(u);
      const Mat heis = u * chi0 * lu.inverse();
      const EigenSystem est = assemble_snapshot(fam, t, false);
      const Mat chit = apply_function(est, chi);
      const Mat e = heis - chit;
      DefectRow row;
      row.n = n;
      row.t = t;
      row.raw = norm_t(fam, t, e);
      row.weighted = norm_t(fam, t, e * lambda_operator(est));
      const Mat back = lu.solve(Mat(chit + e)) ;
      row.conservation = norm_t(fam, 0.0, back * u - chi0);
      c.rows.push_back(row);
      if (std::abs(t) == tmax && tmax > 0) {
        const Mat pulled = lu.solve(Mat(e * u));  // U(0,t) E(t) U(t,0)
        c.proxy1 = std::max(c.proxy1, norm_t(fam, 0.0, lam0 * pulled * lam0));
        c.proxy2 = std::max(c.proxy2, norm_t(fam, 0.0, lam0 * lam0 * pulled * lam0 * lam0));
      }
    }
  }
  std::sort(c.rows.begin(), c.rows.end(), [](const DefectRow& a, const DefectRow& b) { return a.t < b.t; });
  c.rows.erase(std::unique(c.rows.begin(), c.rows.end(),
                           [](const DefectRow& a, const DefectRow& b) { return a.t == b.t; }),
               c.rows.end());
  return c;
}

}  // namespace

Mat heisenberg_defect(const HamiltonianFamily& fam, const SmoothStep& chi, double t, const Mat& u_t0) {
  const Mat heis = u_t0 * chi_of(fam, chi, 0.0) * u_t0.partialPivLu().inverse();
  return heis - chi_of(fam, chi, t);
}

Mat heisenberg_defect(const HamiltonianFamily& fam, const SmoothStep& chi, double t,
                      const EvolveOptions& opt) {
  return heisenberg_defect(fam, chi, t, evolve(fam, 0.0, t, opt).u);
}

DefectReport defect_study(const FamilyBuilder& build, const SmoothStep& chi,
                          const std::vector<double>& t_grid, const std::vector<int>& n_ladder,
                          const EvolveOptions& opt, double growth_cap, int jobs) {
  DefectReport rep;
  rep.growth_cap = growth_cap;
  std::vector<Cell> cells(n_ladder.size());
  auto work = [&](std::size_t i) {
    const HamiltonianFamily fam = build(n_ladder[i]);
    cells[i] = run_ladder_entry(fam, n_ladder[i], chi, t_grid, opt);
  };
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n_ladder.size(); ++i) work(i);
  } else {
    std::vector<std::future<void>> fut;
    for (std::size_t i = 0; i < n_ladder.size(); ++i) fut.push_back(std::async(std::launch::async, work, i));
    for (auto& f : fut) f.get();
  }
  bool finite = true;
  for (std::size_t i = 0; i < n_ladder.size(); ++i) {
    const int n = n_ladder[i];
    double sr = 0.0, sw = 0.0;
    for (const auto& r : cells[i].rows) {
      sr = std::max(sr, r.raw);
      sw = std::max(sw, r.weighted);
      rep.rows.push_back(r);
    }
    finite = finite && std::isfinite(sr) && std::isfinite(sw);
    rep.sup_raw[n] = sr;
    rep.sup_weighted[n] = sw;
    rep.proxy_k1[n] = cells[i].proxy1;
    rep.proxy_k2[n] = cells[i].proxy2;
  }
  bool ok = finite;
  for (std::size_t i = 1; i < n_ladder.size(); ++i) {
    const double g = (rep.sup_weighted[n_ladder[i]] + rep.growth_floor) /
                     (rep.sup_weighted[n_ladder[i - 1]] + rep.growth_floor);
    rep.growth_ratios.push_back(g);
    ok = ok && g < growth_cap;
  }
  rep.pass = ok;
  return rep;
}

std::string defect_csv(const DefectReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "N,t,raw,weighted,proxy_k1,proxy_k2\n";
  for (const auto& row : r.rows)
    os << row.n << ',' << row.t << ',' << row.raw << ',' << row.weighted << ','
       << r.proxy_k1.at(row.n) << ',' << r.proxy_k2.at(row.n) << '\n';
  return os.str();
}

}  // namespace lidx
