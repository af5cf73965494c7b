#include "lidx/aps_solver.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace lidx {

TimeGrid make_time_grid(double t_max, int n_nodes) {
  if (!(t_max > 0.0) || n_nodes < 3) throw Error("make_time_grid: need t_max > 0 and >= 3 nodes");
  TimeGrid g;
  const double sm = compactify(t_max);
  for (int k = 0; k < n_nodes; ++k) {
    const double s = -sm + 2.0 * sm * k / (n_nodes - 1);
    g.t.push_back(k == 0 ? -t_max : (k == n_nodes - 1 ? t_max : decompactify(s)));
  }
  g.w.assign(n_nodes, 0.0);
  for (int k = 0; k + 1 < n_nodes; ++k) {
    const double h = g.t[k + 1] - g.t[k];
    g.w[k] += 0.5 * h;
    g.w[k + 1] += 0.5 * h;
  }
  return g;
}

namespace {

// e^{i c H(t)}, perturbation excluded
Mat expi(const HamiltonianFamily& fam, double t, double c) {
  const EigenSystem es = assemble_snapshot(fam, t, false);
  return apply_function_complex(es, [c](cplx l) { return std::exp(cplx(0.0, c) * l); });
}

}  // namespace

DiscreteEvolution::DiscreteEvolution(const HamiltonianFamily& fam, TimeGrid grid,
                                     const EvolveOptions& opt)
    : fam_(fam), grid_(std::move(grid)) {
  const int n = grid_.size();
  for (int k = 0; k + 1 < n; ++k) {
    const Propagator p = evolve(fam_, grid_.t[k], grid_.t[k + 1], opt);
    prop_err_ += p.est_error;
    phi_.push_back(p.u);
    phi_inv_.push_back(p.u.partialPivLu().inverse());
  }
  for (int k = 0; k < n; ++k) g_.push_back(fam_.weight(grid_.t[k]));
  const double T = grid_.t.back(), T0 = grid_.t.front();
  out_plus_ = expi(fam_, T, -T);
  in_plus_ = expi(fam_, T, T);
  out_minus_ = expi(fam_, T0, -T0);
  in_minus_ = expi(fam_, T0, T0);
}

TimeGridFunction zero_function(const DiscreteEvolution& ev) {
  TimeGridFunction f;
  f.values.assign(ev.grid().size(), Vec::Zero(ev.dim()));
  return f;
}

TimeGridFunction random_function(const DiscreteEvolution& ev, unsigned seed, double support) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  TimeGridFunction f = zero_function(ev);
  for (int k = 0; k < ev.grid().size(); ++k) {
    const double t = ev.grid().t[k];
    // smooth envelope so the weighted norm stays tame
    const double env = support > 0 ? (std::abs(t) < support ? std::pow(std::cos(0.5 * std::numbers::pi * t / support), 2) : 0.0)
                                   : 1.0 / (1.0 + t * t);
    for (int i = 0; i < ev.dim(); ++i) f.values[k](i) = env * cplx(nd(rng), nd(rng));
  }
  return f;
}

double evolution_residual(const DiscreteEvolution& ev, const TimeGridFunction& u,
                          const TimeGridFunction& f) {
  const int n = ev.grid().size();
  if (static_cast<int>(u.values.size()) != n || static_cast<int>(f.values.size()) != n)
    throw Error("evolution_residual: grid size mismatch");
  double scale = 1.0, res = 0.0;
  for (int k = 0; k < n; ++k) scale = std::max(scale, u.values[k].norm());
  for (int k = 0; k + 1 < n; ++k) {
    const double h = ev.grid().t[k + 1] - ev.grid().t[k];
    const Vec r = u.values[k + 1] - ev.step(k) * u.values[k] -
                  0.5 * h * (ev.step(k) * f.values[k] + f.values[k + 1]);
    res = std::max(res, r.norm());
  }
  return res / scale;
}

Vec asymptotic_data(const DiscreteEvolution& ev, const TimeGridFunction& u,
                    const TimeGridFunction& f, int direction, double residual_tol) {
  const double res = evolution_residual(ev, u, f);
  if (!(res <= residual_tol)) {
    std::ostringstream os;
    os << "asymptotic_data: evolution residual " << res << " exceeds " << residual_tol;
    throw NotASolution(os.str(), res);
  }
  if (direction > 0) return ev.exit_phase_plus() * u.values.back();
  return ev.exit_phase_minus() * u.values.front();
}

TimeGridFunction solve_from_data(const DiscreteEvolution& ev, const Vec& v,
                                 const TimeGridFunction& f, int direction) {
  const int n = ev.grid().size();
  if (static_cast<int>(f.values.size()) != n) throw Error("solve_from_data: grid size mismatch");
  TimeGridFunction u;
  u.weight_epsilon = f.weight_epsilon;
  u.values.assign(n, Vec::Zero(ev.dim()));
  if (direction > 0) {
    u.values[n - 1] = ev.entry_phase_plus() * v;
    for (int k = n - 2; k >= 0; --k) {
      const double h = ev.grid().t[k + 1] - ev.grid().t[k];
      u.values[k] = ev.step_inv(k) * (u.values[k + 1] - 0.5 * h * f.values[k + 1]) -
                    0.5 * h * f.values[k];
    }
  } else {
    u.values[0] = ev.entry_phase_minus() * v;
    for (int k = 0; k + 1 < n; ++k) {
      const double h = ev.grid().t[k + 1] - ev.grid().t[k];
      u.values[k + 1] =
          ev.step(k) * (u.values[k] + 0.5 * h * f.values[k]) + 0.5 * h * f.values[k + 1];
    }
  }
  return u;
}

TimeGridFunction retarded_advanced_inverse(const DiscreteEvolution& ev, const TimeGridFunction& f,
                                           int sign) {
  return solve_from_data(ev, Vec::Zero(ev.dim()), f, sign > 0 ? -1 : +1);
}

cplx pairing(const DiscreteEvolution& ev, const TimeGridFunction& f, const TimeGridFunction& g) {
  cplx acc = 0.0;
  for (int k = 0; k < ev.grid().size(); ++k)
    acc += ev.grid().w[k] * (f.values[k].adjoint() * ev.weight(k) * g.values[k])(0, 0);
  return acc;
}

double weighted_norm(const DiscreteEvolution& ev, const TimeGridFunction& f) {
  double acc = 0.0;
  for (int k = 0; k < ev.grid().size(); ++k) {
    const double wt = std::pow(bracket(ev.grid().t[k]), -1.0 - 2.0 * f.weight_epsilon);
    acc += ev.grid().w[k] * wt *
           std::abs((f.values[k].adjoint() * ev.weight(k) * f.values[k])(0, 0));
  }
  return std::sqrt(acc);
}

QFormValues q_parametrix_form(const DiscreteEvolution& ev, const TimeGridFunction& f) {
  const TimeGridFunction u = retarded_advanced_inverse(ev, f, -1);
  const Vec r = ev.exit_phase_minus() * u.values.front();
  const EigenSystem es0 = assemble_snapshot(ev.family(), ev.grid().t.front(), false);
  const Mat pi = spectral_projection(es0, SpectralCut::nonnegative());
  const Vec h = pi * r;
  TimeGridFunction g = solve_from_data(ev, h, zero_function(ev), -1);
  for (auto& x : g.values) x = -x;  // (Q - D_-^{-1}) f
  QFormValues q;
  const cplx a = pairing(ev, f, g);
  q.a = a.real();
  q.a_imag = a.imag();
  q.b = std::abs((h.adjoint() * ev.weight(0) * h)(0, 0));
  return q;
}

SupportDefect one_sided_support_defect(const DiscreteEvolution& ev, const Vec& v) {
  const HamiltonianFamily& fam = ev.family();
  const EigenSystem ep = assemble_snapshot(fam, kInf, false);
  const Mat pnn = spectral_projection(ep, SpectralCut::nonnegative());
  const double vn = std::sqrt(std::abs((v.adjoint() * ep.weight * v)(0, 0)));
  const Vec vp = pnn * v;
  if (std::sqrt(std::abs((vp.adjoint() * ep.weight * vp)(0, 0))) > 1e-8 * std::max(1.0, vn))
    throw InvalidInstance("one_sided_support_defect: v not in the negative spectral subspace of H+");
  SupportDefect d;
  double gap = kInf;
  for (int i = 0; i < ep.size(); ++i) {
    const double a = std::abs(ep.eigenvalues(i));
    if (a > default_gap_tol(ep)) gap = std::min(gap, a);
  }
  d.epsilon0 = std::isfinite(gap) ? 0.5 * gap : 0.5;
  const TimeGridFunction u = solve_from_data(ev, v, zero_function(ev), +1);
  for (int k = 0; k < ev.grid().size(); ++k) {
    const double t = ev.grid().t[k];
    const EigenSystem es = assemble_snapshot(fam, t, false);
    const Mat p = spectral_projection(es, SpectralCut{d.epsilon0, Side::above, true, false});
    const Vec pu = p * u.values[k];
    const Vec lpu = lambda_operator(es) * pu;
    SupportDefectRow row;
    row.t = t;
    row.r = std::sqrt(std::abs((pu.adjoint() * es.weight * pu)(0, 0)));
    row.weighted = std::sqrt(std::abs((lpu.adjoint() * es.weight * lpu)(0, 0)));
    d.sup_r = std::max(d.sup_r, row.r);
    d.sup_weighted = std::max(d.sup_weighted, row.weighted);
    d.rows.push_back(row);
  }
  return d;
}

IndexReport aps_index(const HamiltonianFamily& fam, const std::optional<CircleGeometry>& geom,
                      const IndexOptions& opt) {
  IndexReport rep;
  const ScatteringData sd = compute_scattering(fam, opt.moller);
  rep.cauchy_residual = sd.cauchy_residual;
  rep.horizon = sd.horizon;
  const EigenSystem ep = reference_snapshot(fam, kInf);
  const EigenSystem em = reference_snapshot(fam, -kInf);

  const ScatteringBlocks aps =
      scattering_blocks(sd.w0, ep, em, SpectralCut::nonpositive(), SpectralCut::negative());
  rep.aps_block = block_index(aps.mm, opt.rank_tol);
  rep.index_block = rep.aps_block.index;
  const ScatteringBlocks strict =
      scattering_blocks(sd.w0, ep, em, SpectralCut::negative(), SpectralCut::negative());
  rep.sf_block = block_index(strict.mm, opt.rank_tol);
  rep.index_sf_block = rep.sf_block.index;
  rep.gray_zone = rep.aps_block.gray_zone || rep.sf_block.gray_zone;
  if (rep.gray_zone) rep.caveats.push_back("gray-zone singular values: low-confidence index");

  const SpectralFlowResult sf = spectral_flow(fam, -1.0, 1.0, opt.tracks, opt.partition);
  rep.sf = sf.sf;
  const double tp = default_gap_tol(ep), tm = default_gap_tol(em);
  for (int i = 0; i < ep.size(); ++i)
    if (std::abs(ep.eigenvalues(i)) <= tp) ++rep.ker_plus;
  for (int i = 0; i < em.size(); ++i)
    if (std::abs(em.eigenvalues(i)) <= tm) ++rep.ker_minus;
  rep.sf_minus_ker = rep.sf - rep.ker_plus;
  rep.agree_block_sf = rep.index_sf_block == rep.sf;

  bool rhs_ok = true;
  if (geom) {
    const ApsRhs rhs = aps_rhs_circle(*geom);
    rep.has_rhs = true;
    rep.eta_plus = rhs.eta_plus;
    rep.eta_minus = rhs.eta_minus;
    rep.rhs = rhs.rhs_value;
    for (const auto& c : rhs.caveats) rep.caveats.push_back(c);
    rep.agree_block_rhs = std::abs(rep.rhs - rep.index_block) < 1e-9;
    if (!geom->twisted()) rhs_ok = rep.agree_block_rhs;
  }
  rep.agreement = rep.index_block == rep.sf_minus_ker && rhs_ok;
  return rep;
}

}  // namespace lidx
