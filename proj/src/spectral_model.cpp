#include "lidx/spectral_model.hpp"
#include "lidx/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace lidx {

// ---------------------------------------------------------------- family

Mat HamiltonianFamily::h0(double t) const {
  if (t == kInf) return h0_plus;
  if (t == -kInf) return h0_minus;
  return h0_at(t);
}

Mat HamiltonianFamily::similarity(double t) const {
  if (!t_at) return Mat::Identity(dim, dim);
  if (t == kInf) return t_plus;
  if (t == -kInf) return t_minus;
  return t_at(t);
}

Mat HamiltonianFamily::similarity_inv(double t) const {
  if (!t_at) return Mat::Identity(dim, dim);
  return similarity(t).partialPivLu().inverse();
}

Mat HamiltonianFamily::v(double t) const {
  if (!v_at || std::isinf(t)) return Mat::Zero(dim, dim);
  return v_at(t);
}

Mat HamiltonianFamily::h(double t, bool with_v) const {
  Mat out;
  if (t_at) {
    const Mat tt = similarity(t);
    out = tt * h0(t) * tt.partialPivLu().inverse();
  } else {
    out = h0(t);
  }
  if (with_v && v_at && !std::isinf(t)) out += v_at(t);
  return out;
}

Mat HamiltonianFamily::weight(double t) const {
  if (!t_at) return Mat::Identity(dim, dim);
  const Mat ti = similarity_inv(t);
  return ti.adjoint() * ti;
}

HamiltonianFamily HamiltonianFamily::constant(const Mat& h0) {
  HamiltonianFamily f;
  f.dim = static_cast<int>(h0.rows());
  f.h0_at = [h0](double) { return h0; };
  f.h0_minus = h0;
  f.h0_plus = h0;
  f.t_minus = f.t_plus = Mat::Identity(f.dim, f.dim);
  f.delta = 2.0;
  f.diagonal = h0.isDiagonal(0.0);
  f.label = "constant";
  return f;
}

HamiltonianFamily HamiltonianFamily::diagonal_family(int dim, std::function<RVec(double)> eig,
                                                     double delta) {
  HamiltonianFamily f;
  f.dim = dim;
  f.h0_at = [eig](double t) -> Mat { return eig(t).cast<cplx>().asDiagonal(); };
  f.h0_minus = eig(-kInf).cast<cplx>().asDiagonal();
  f.h0_plus = eig(kInf).cast<cplx>().asDiagonal();
  f.t_minus = f.t_plus = Mat::Identity(dim, dim);
  f.delta = delta;
  f.diagonal = true;
  f.label = "diagonal";
  return f;
}

// ---------------------------------------------------------- eigensystems

Mat EigenSystem::reconstruct() const {
  Vec lam(size());
  for (int i = 0; i < size(); ++i) lam(i) = cplx(eigenvalues(i), imag_parts(i));
  return vectors * lam.asDiagonal() * inverse;
}

namespace {

// largest-modulus component of each column made real positive
void fix_phases(Mat& v, Mat& inv) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index best = 0;
    double bmax = -1.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double a = std::abs(v(i, j));
      if (a > bmax * (1.0 + 1e-12)) {
        bmax = a;
        best = i;
      }
    }
    if (bmax <= 0.0) continue;
    const cplx ph = std::conj(v(best, j)) / bmax;
    v.col(j) *= ph;
    inv.row(j) /= ph;
    v(best, j) = cplx(v(best, j).real(), 0.0);
  }
}

void check_hermitian(const Mat& h0) {
  const double sc = std::max(1.0, h0.norm());
  const double asym = (h0 - h0.adjoint()).norm();
  if (asym > 1e-10 * sc) {
    std::ostringstream os;
    os << "H0 not Hermitian: ||H0 - H0*|| = " << asym;
    throw InvariantViolation(os.str());
  }
}

}  // namespace

EigenSystem eigensystem_similar(const Mat& h0, const Mat& t, const Mat& t_inv) {
  check_hermitian(h0);
  const Mat hs = 0.5 * (h0 + h0.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> solver(hs);
  if (solver.info() != Eigen::Success)
    throw EigenSolverFailure("self-adjoint eigensolver failed", condition_number(t));
  EigenSystem es;
  const int n = static_cast<int>(h0.rows());
  es.eigenvalues = solver.eigenvalues();
  es.imag_parts = RVec::Zero(n);
  es.vectors = t * solver.eigenvectors();
  es.inverse = solver.eigenvectors().adjoint() * t_inv;
  fix_phases(es.vectors, es.inverse);
  es.weight = t_inv.adjoint() * t_inv;
  es.scale = n ? es.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  es.self_adjoint = true;
  return es;
}

EigenSystem eigensystem_hermitian(const Mat& h0) {
  const int n = static_cast<int>(h0.rows());
  return eigensystem_similar(h0, Mat::Identity(n, n), Mat::Identity(n, n));
}

EigenSystem eigensystem_general(const Mat& h, const Mat& weight) {
  Eigen::ComplexEigenSolver<Mat> solver(h);
  if (solver.info() != Eigen::Success)
    throw EigenSolverFailure("complex eigensolver failed", condition_number(h));
  const int n = static_cast<int>(h.rows());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return ev(a).real() < ev(b).real(); });
  EigenSystem es;
  es.eigenvalues.resize(n);
  es.imag_parts.resize(n);
  es.vectors.resize(n, n);
  for (int j = 0; j < n; ++j) {
    es.eigenvalues(j) = ev(order[j]).real();
    es.imag_parts(j) = ev(order[j]).imag();
    Vec col = solver.eigenvectors().col(order[j]);
    const double nrm = std::sqrt(std::abs(cplx((col.adjoint() * weight * col)(0, 0))));
    es.vectors.col(j) = nrm > 0 ? Vec(col / nrm) : col;
  }
  Eigen::PartialPivLU<Mat> lu(es.vectors);
  es.inverse = lu.inverse();
  const double cond = condition_number(es.vectors);
  if (!std::isfinite(cond) || cond > 1e12)
    throw EigenSolverFailure("eigenvector matrix ill-conditioned", cond);
  fix_phases(es.vectors, es.inverse);
  es.weight = weight;
  es.scale = 0.0;
  for (int j = 0; j < n; ++j) es.scale = std::max(es.scale, std::abs(ev(j)));
  es.self_adjoint = false;
  return es;
}

EigenSystem assemble_snapshot(const HamiltonianFamily& fam, double t, bool with_v) {
  if (std::isnan(t)) throw Error("assemble_snapshot: time is NaN");
  EigenSystem es;
  if (with_v && fam.has_v() && !std::isinf(t)) {
    es = eigensystem_general(fam.h(t, true), fam.weight(t));
  } else {
    const Mat tt = fam.similarity(t);
    const Mat ti = fam.t_at ? Mat(tt.partialPivLu().inverse()) : tt;
    es = eigensystem_similar(fam.h0(t), tt, ti);
    // eigenvalues are real by construction; check the similarity is sane
    const Mat h = fam.h(t, false);
    const double rec = (h - es.reconstruct()).norm();
    if (rec > 1e-8 * std::max(1.0, h.norm()))
      throw EigenSolverFailure("snapshot reconstruction failed", condition_number(tt));
  }
  return es;
}

EigenSystem reference_snapshot(const HamiltonianFamily& fam, double t) {
  return eigensystem_hermitian(fam.h0(t));
}

// ------------------------------------------------------------------ cuts

SpectralCut SpectralCut::complement() const {
  SpectralCut c = *this;
  c.side = side == Side::below ? Side::above : Side::below;
  c.include_threshold = !include_threshold;
  return c;
}

std::string SpectralCut::describe() const {
  std::ostringstream os;
  if (side == Side::below)
    os << "(-inf," << threshold << (include_threshold ? "]" : ")");
  else
    os << (include_threshold ? "[" : "(") << threshold << ",inf)";
  return os.str();
}

double default_gap_tol(const EigenSystem& es) { return 1e-9 * std::max(1.0, es.scale); }

std::vector<int> select_indices(const EigenSystem& es, const SpectralCut& cut, double gap_tol) {
  if (gap_tol < 0) gap_tol = default_gap_tol(es);
  std::vector<int> out;
  for (int i = 0; i < es.size(); ++i) {
    const double d = es.eigenvalues(i) - cut.threshold;
    bool take;
    if (std::abs(d) <= gap_tol) {
      if (cut.require_gap) {
        std::ostringstream os;
        os << "eigenvalue " << es.eigenvalues(i) << " within " << gap_tol << " of threshold "
           << cut.threshold;
        throw GapTooSmall(os.str(), es.eigenvalues(i), cut.threshold);
      }
      take = cut.include_threshold;
    } else {
      take = cut.side == Side::below ? d < 0 : d > 0;
    }
    if (take) out.push_back(i);
  }
  return out;
}

int cut_rank(const EigenSystem& es, const SpectralCut& cut, double gap_tol) {
  return static_cast<int>(select_indices(es, cut, gap_tol).size());
}

Mat spectral_projection(const EigenSystem& es, const SpectralCut& cut, double gap_tol) {
  const auto idx = select_indices(es, cut, gap_tol);
  const int n = es.size();
  Mat p = Mat::Zero(n, n);
  for (int i : idx) p += es.vectors.col(i) * es.inverse.row(i);
  return p;
}

Mat apply_function(const EigenSystem& es, const RealFn& f) {
  Vec d(es.size());
  for (int i = 0; i < es.size(); ++i) d(i) = f(es.eigenvalues(i));
  return es.vectors * d.asDiagonal() * es.inverse;
}

Mat apply_function_complex(const EigenSystem& es, const std::function<cplx(cplx)>& f) {
  Vec d(es.size());
  for (int i = 0; i < es.size(); ++i) d(i) = f(cplx(es.eigenvalues(i), es.imag_parts(i)));
  return es.vectors * d.asDiagonal() * es.inverse;
}

Mat lambda_operator(const EigenSystem& es) {
  return apply_function(es, [](double x) { return bracket(x); });
}

// ------------------------------------------------------ Helffer-Sjostrand

SmoothFunction SmoothFunction::lorentzian() {
  SmoothFunction f;
  f.name = "lorentzian";
  f.value = [](double x) { return 1.0 / (1.0 + x * x); };
  f.derivative = [](double x, int k) {
    const cplx a = std::pow(cplx(x, -1.0), -(k + 1));
    const cplx b = std::pow(cplx(x, 1.0), -(k + 1));
    double fact = 1.0;
    for (int j = 2; j <= k; ++j) fact *= j;
    const double sgn = (k % 2) ? -1.0 : 1.0;
    return (sgn * fact * (a - b) / cplx(0.0, 2.0)).real();
  };
  return f;
}

SmoothFunction SmoothFunction::gaussian(double width) {
  SmoothFunction f;
  f.name = "gaussian";
  const double c = width * std::sqrt(2.0);
  f.value = [c](double x) { return std::exp(-(x / c) * (x / c)); };
  f.derivative = [c](double x, int k) {
    const double u = x / c;
    // physicists' Hermite recurrence
    double h0 = 1.0, h1 = 2.0 * u;
    double hk = k == 0 ? h0 : h1;
    for (int j = 2; j <= k; ++j) {
      hk = 2.0 * u * h1 - 2.0 * (j - 1) * h0;
      h0 = h1;
      h1 = hk;
    }
    return std::pow(-1.0 / c, k) * hk * std::exp(-u * u);
  };
  return f;
}

namespace {

double bump_s(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }
double bump_ds(double x) { return x > 0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

// psi = 1 on [0,1], 0 beyond 2
double cutoff(double eta) {
  if (eta <= 1.0) return 1.0;
  if (eta >= 2.0) return 0.0;
  const double p = bump_s(2.0 - eta), q = bump_s(eta - 1.0);
  return p / (p + q);
}

double cutoff_d(double eta) {
  if (eta <= 1.0 || eta >= 2.0) return 0.0;
  const double p = bump_s(2.0 - eta), q = bump_s(eta - 1.0);
  const double dp = -bump_ds(2.0 - eta), dq = bump_ds(eta - 1.0);
  return (dp * q - p * dq) / ((p + q) * (p + q));
}

double hs_integral(double lambda, const SmoothFunction& f, int n_aa, const ContourGrid& g,
                   int panels) {
  const GaussRule rule = gauss_legendre(g.order);
  std::vector<double> fact(n_aa + 2, 1.0);
  for (int k = 1; k <= n_aa + 1; ++k) fact[k] = fact[k - 1] * k;
  const double L = g.length_scale;
  double total = 0.0;
  // u panels on (-1, 1), eta panels on (0, 2) split at 1
  for (int pu = 0; pu < panels; ++pu) {
    const double ua = -1.0 + 2.0 * pu / panels, ub = -1.0 + 2.0 * (pu + 1) / panels;
    for (int iu = 0; iu < g.order; ++iu) {
      const double u = 0.5 * (ua + ub) + 0.5 * (ub - ua) * rule.nodes[iu];
      const double wu = 0.5 * (ub - ua) * rule.weights[iu];
      const double om = 1.0 - u * u;
      const double x = lambda + L * u / om;
      const double dxdu = L * (1.0 + u * u) / (om * om);
      const double bx = bracket(x);
      std::vector<double> der(n_aa + 2);
      for (int k = 0; k <= n_aa + 1; ++k) der[k] = f.derivative(x, k);
      const int ep = std::max(1, panels / 4);
      for (int half = 0; half < 2; ++half) {
        for (int pe = 0; pe < ep; ++pe) {
          const double ea = half + static_cast<double>(pe) / ep;
          const double eb = half + static_cast<double>(pe + 1) / ep;
          for (int ie = 0; ie < g.order; ++ie) {
            const double eta = 0.5 * (ea + eb) + 0.5 * (eb - ea) * rule.nodes[ie];
            const double we = 0.5 * (eb - ea) * rule.weights[ie];
            const double y = eta * bx;
            const cplx iy(0.0, y);
            cplx s = 0.0, pw = 1.0;
            for (int k = 0; k <= n_aa; ++k) {
              s += der[k] * pw / fact[k];
              pw *= iy;
            }
            // pw = (iy)^(n_aa+1); need (iy)^n_aa
            const cplx pn = n_aa == 0 ? cplx(1.0) : pw / iy;
            const double psi = cutoff(eta);
            const double dpsi = cutoff_d(eta);
            const double dpx = dpsi * (-eta * x / (bx * bx));
            const double dpy = dpsi / bx;
            const cplx dbar =
                0.5 * psi * der[n_aa + 1] * pn / fact[n_aa] + 0.5 * s * cplx(dpx, dpy);
            const cplx z(x, y);
            total += (dbar / (z - lambda)).real() * wu * dxdu * we * bx;
          }
        }
      }
    }
  }
  return -2.0 / std::numbers::pi * total;
}

}  // namespace

double helffer_sjostrand_scalar(double lambda, const SmoothFunction& f, int aa_order,
                                const ContourGrid& grid) {
  return hs_integral(lambda, f, aa_order, grid, grid.panels);
}

HsResult helffer_sjostrand_apply(const EigenSystem& es, const SmoothFunction& f, int aa_order,
                                 const ContourGrid& grid, double hs_tol) {
  if (aa_order < 1) throw Error("helffer_sjostrand_apply: aa_order must be >= 1");
  const int n = es.size();
  std::vector<double> residuals;
  RVec prev(n), cur(n);
  int panels = grid.panels;
  for (int i = 0; i < n; ++i) prev(i) = hs_integral(es.eigenvalues(i), f, aa_order, grid, panels);
  double res = kInf;
  for (int d = 0; d < grid.max_doublings; ++d) {
    panels *= 2;
    for (int i = 0; i < n; ++i) cur(i) = hs_integral(es.eigenvalues(i), f, aa_order, grid, panels);
    res = n ? (cur - prev).cwiseAbs().maxCoeff() : 0.0;
    residuals.push_back(res);
    prev = cur;
    if (res <= 0.1 * hs_tol) break;
  }
  if (!(res <= hs_tol))
    throw ConvergenceError("Helffer-Sjostrand quadrature did not converge", residuals);
  HsResult out;
  out.value = es.vectors * cur.cast<cplx>().asDiagonal() * es.inverse;
  out.residual = res;
  out.panels_used = panels;
  return out;
}

// ----------------------------------------------------------------- decay

DecayFit verify_decay_hypothesis(const HamiltonianFamily& fam, const std::vector<double>& t_grid,
                                 double slope_tol, double tail_start) {
  DecayFit fit;
  fit.delta = fam.delta;
  const Mat hp = fam.h_plus(), hm = fam.h_minus();
  std::vector<double> xs, ys;
  int n_pos = 0, n_neg = 0;
  const double scale = std::max(1.0, op_norm(hp));
  for (double t : t_grid) {
    if (std::abs(t) < tail_start || std::isinf(t)) continue;
    const Mat d = fam.h(t) - (t > 0 ? hp : hm);
    const double nrm = op_norm(d);
    fit.max_difference = std::max(fit.max_difference, nrm);
    (t > 0 ? n_pos : n_neg)++;
    if (nrm > 1e-14 * scale) {
      xs.push_back(bracket(t));
      ys.push_back(nrm);
    }
  }
  if (n_pos < 2 || n_neg < 2) throw Error("verify_decay_hypothesis: insufficient tail samples");
  fit.samples = static_cast<int>(xs.size());
  if (xs.size() < 3) {
    fit.exact = true;
    fit.matches_exponent = true;
    fit.pass = true;
    fit.slope = -kInf;
    return fit;
  }
  const LineFit lf = fit_loglog(xs, ys);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  fit.slope_stderr = lf.slope_stderr;
  fit.matches_exponent = std::abs(lf.slope + fam.delta) <= slope_tol;
  fit.pass = lf.slope <= -fam.delta + slope_tol;
  return fit;
}

std::string snapshot_csv(const HamiltonianFamily& fam, const std::vector<double>& t_grid) {
  std::ostringstream os;
  os.precision(17);
  os << "t,index,eigenvalue,imag\n";
  for (double t : t_grid) {
    const EigenSystem es = assemble_snapshot(fam, t);
    for (int i = 0; i < es.size(); ++i)
      os << t << ',' << i << ',' << es.eigenvalues(i) << ',' << es.imag_parts(i) << '\n';
  }
  return os.str();
}

}  // namespace lidx
