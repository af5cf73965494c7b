#include "lidx/scattering.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lidx {

MollerResult moller_limit(const HamiltonianFamily& fam, int direction, const MollerOptions& opt) {
  if (!(fam.delta > 1.0)) throw Error("moller_limit: family delta must exceed 1");
  if (direction != 1 && direction != -1) throw Error("moller_limit: direction must be +1 or -1");
  if (!(opt.t_start > 0.0) || opt.t_cap < opt.t_start)
    throw Error("moller_limit: invalid horizon ladder");
  MollerResult r;
  const double sgn = direction;
  double T = opt.t_start;
  Mat u0 = evolve(fam, sgn * T, 0.0, opt.evolve).u;  // U(0, +-T)
  Mat w = u0 * phase(fam, sgn * T);
  while (true) {
    const double T2 = 2.0 * T;
    if (T2 > opt.t_cap * (1.0 + 1e-12)) break;
    const Mat seg = evolve(fam, sgn * T2, sgn * T, opt.evolve).u;  // U(+-T, +-2T)
    u0 = u0 * seg;
    const Mat w2 = u0 * phase(fam, sgn * T2);
    const double res = op_norm(w2 - w);
    r.horizons.push_back(T2);
    r.residuals.push_back(res);
    w = w2;
    T = T2;
    if (res < opt.tol && !opt.full_ladder) break;
  }
  r.w = w;
  r.horizon = T;
  r.residual = r.residuals.empty() ? 0.0 : r.residuals.back();
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < r.residuals.size(); ++k) {
    if (r.residuals[k] > 1e-12) {
      xs.push_back(r.horizons[k]);
      ys.push_back(r.residuals[k]);
    }
  }
  r.exact = xs.empty();
  if (xs.size() >= 2) r.fit = fit_loglog(xs, ys);
  r.converged = !r.residuals.empty() && r.residual <= opt.tol;
  if (r.residuals.empty()) r.converged = true;
  if (!r.converged) {
    std::ostringstream os;
    os << "Moller limit not converged by T = " << r.horizon << " (residual " << r.residual << ")";
    throw ConvergenceError(os.str(), r.residuals);
  }
  return r;
}

ScatteringData compute_scattering(const HamiltonianFamily& fam, const MollerOptions& opt) {
  ScatteringData sd;
  sd.plus = moller_limit(fam, +1, opt);
  sd.minus = moller_limit(fam, -1, opt);
  sd.w_plus = sd.plus.w;
  sd.w_minus = sd.minus.w;
  sd.w = sd.w_plus.partialPivLu().solve(sd.w_minus);
  const Mat tm = fam.similarity(-kInf);
  const Mat tp_inv = fam.similarity_inv(kInf);
  sd.w0 = tp_inv * sd.w * tm;
  sd.horizon = std::max(sd.plus.horizon, sd.minus.horizon);
  sd.cauchy_residual = std::max(sd.plus.residual, sd.minus.residual);
  return sd;
}

Mat scattering_operator(const HamiltonianFamily& fam, double t, double s, const EvolveOptions& opt) {
  const Mat u = evolve(fam, s, t, opt).u;
  return phase(fam, t).partialPivLu().solve(Mat(u * phase(fam, s)));
}

double group_law_residual(const HamiltonianFamily& fam, double t, double s, double r,
                          const EvolveOptions& opt) {
  const Mat wts = scattering_operator(fam, t, s, opt);
  const Mat wsr = scattering_operator(fam, s, r, opt);
  const Mat wtr = scattering_operator(fam, t, r, opt);
  return op_norm(wts * wsr - wtr);
}

ScatteringBlocks scattering_blocks(const Mat& w0, const EigenSystem& es_plus,
                                   const EigenSystem& es_minus, const SpectralCut& cut_out,
                                   const SpectralCut& cut_in) {
  ScatteringBlocks b;
  b.m = es_plus.inverse * w0 * es_minus.vectors;
  b.rows_minus = select_indices(es_plus, cut_out);
  b.rows_plus = select_indices(es_plus, cut_out.complement());
  b.cols_minus = select_indices(es_minus, cut_in);
  b.cols_plus = select_indices(es_minus, cut_in.complement());
  b.mm = submatrix(b.m, b.rows_minus, b.cols_minus);
  b.mp = submatrix(b.m, b.rows_minus, b.cols_plus);
  b.pm = submatrix(b.m, b.rows_plus, b.cols_minus);
  b.pp = submatrix(b.m, b.rows_plus, b.cols_plus);
  return b;
}

BlockIndexResult block_index(const Mat& block, double rank_tol) {
  BlockIndexResult r;
  r.dim_codom = static_cast<int>(block.rows());
  r.dim_dom = static_cast<int>(block.cols());
  if (block.size() > 0) {
    Eigen::JacobiSVD<Mat> svd(block);
    r.singulars = svd.singularValues();
    const double smax = r.singulars.size() ? r.singulars(0) : 0.0;
    const double cut = rank_tol * smax;
    for (Eigen::Index i = 0; i < r.singulars.size(); ++i) {
      const double s = r.singulars(i);
      if (s >= cut && s > 0.0) ++r.rank;
      if (s >= 0.1 * cut && s <= 10.0 * cut) {
        r.gray_zone = true;
        r.gray_values.push_back(s);
      }
    }
  }
  r.num_kernel = r.dim_dom - r.rank;
  r.num_cokernel = r.dim_codom - r.rank;
  r.index = r.num_kernel - r.num_cokernel;
  return r;
}

namespace {

// W(0, x) with x finite or +-inf (horizon t_cap)
Mat w_from_zero(const HamiltonianFamily& fam, double x, const MollerOptions& opt) {
  if (std::isinf(x)) {
    MollerOptions o = opt;
    o.full_ladder = true;
    return moller_limit(fam, x > 0 ? 1 : -1, o).w;
  }
  return evolve(fam, x, 0.0, opt.evolve).u * phase(fam, x);
}

EigenSystem snapshot_ext(const HamiltonianFamily& fam, double t) {
  return assemble_snapshot(fam, t, false);
}

}  // namespace

CompactnessProfile compactness_profile(const HamiltonianFamily& fam, double t, double s,
                                       const SpectralCut& cut_i, const SpectralCut& cut_j,
                                       const MollerOptions& opt) {
  const Mat w0t = w_from_zero(fam, t, opt);
  const Mat w0s = w_from_zero(fam, s, opt);
  const Mat w = w0t.partialPivLu().solve(w0s);  // W(t,s) = W(0,t)^-1 W(0,s)
  const EigenSystem et = snapshot_ext(fam, t), es = snapshot_ext(fam, s);
  const Mat m = et.inverse * w * es.vectors;
  const auto ri = select_indices(et, cut_i);
  const auto cj = select_indices(es, cut_j);
  const Mat blk = submatrix(m, ri, cj);
  CompactnessProfile p;
  if (blk.size() == 0) {
    p.tail_monotone = true;
    return p;
  }
  Eigen::JacobiSVD<Mat> svd(blk);
  p.singulars = svd.singularValues();

  std::vector<int> order(cj.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues(cj[a])) < std::abs(es.eigenvalues(cj[b]));
  });
  p.column_norms.resize(order.size());
  p.column_freqs.resize(order.size());
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < order.size(); ++k) {
    p.column_norms(k) = blk.col(order[k]).norm();
    p.column_freqs(k) = std::abs(es.eigenvalues(cj[order[k]]));
    xs.push_back(bracket(p.column_freqs(k)));
    ys.push_back(p.column_norms(k));
  }
  p.decay_exponent = fit_loglog(xs, ys).slope;
  const std::size_t n = order.size(), third = std::max<std::size_t>(1, n / 3);
  double head = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < third; ++k) head = std::max(head, p.column_norms(k));
  for (std::size_t k = n - third; k < n; ++k) tail = std::max(tail, p.column_norms(k));
  p.tail_monotone = tail <= head + 1e-14;

  RVec wi(ri.size()), wj(cj.size());
  for (std::size_t k = 0; k < ri.size(); ++k) wi(k) = bracket(et.eigenvalues(ri[k]));
  for (std::size_t k = 0; k < cj.size(); ++k) wj(k) = bracket(es.eigenvalues(cj[k]));
  const Mat b1 = wi.cast<cplx>().asDiagonal() * blk * wj.cast<cplx>().asDiagonal();
  const Mat b2 = wi.array().square().matrix().cast<cplx>().asDiagonal() * blk *
                 wj.array().square().matrix().cast<cplx>().asDiagonal();
  p.proxy_p1 = op_norm(b1);
  p.proxy_p2 = op_norm(b2);
  return p;
}

}  // namespace lidx
