#include "lidx/propagator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace lidx {

Scheme parse_scheme(const std::string& s) {
  if (s == "magnus4") return Scheme::magnus4;
  if (s == "exp_midpoint" || s == "midpoint") return Scheme::exp_midpoint;
  if (s == "crank_nicolson") return Scheme::crank_nicolson;
  throw ConfigError("unknown scheme '" + s + "'");
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::magnus4: return "magnus4";
    case Scheme::exp_midpoint: return "exp_midpoint";
    case Scheme::crank_nicolson: return "crank_nicolson";
  }
  return "?";
}

double compactify(double t) {
  if (t == kInf) return 1.0;
  if (t == -kInf) return -1.0;
  return t / (1.0 + std::abs(t));
}

double decompactify(double sigma) {
  if (sigma >= 1.0) return kInf;
  if (sigma <= -1.0) return -kInf;
  return sigma / (1.0 - std::abs(sigma));
}

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kC1 = 0.5 - kSqrt3 / 6.0, kC2 = 0.5 + kSqrt3 / 6.0;
constexpr double kA1 = (3.0 - 2.0 * kSqrt3) / 12.0, kA2 = (3.0 + 2.0 * kSqrt3) / 12.0;

int scheme_order(Scheme s) { return s == Scheme::magnus4 ? 4 : 2; }

// exp(i dt (b1 H(t1) + b2 H(t2))), picking the cheapest exact route
Mat exp_generator(const HamiltonianFamily& fam, double dt, double t1, double b1, double t2,
                  double b2, bool with_v) {
  const bool use_v = with_v && fam.has_v();
  if (fam.diagonal && !use_v) {
    Vec d = b1 * fam.h0(t1).diagonal();
    if (b2 != 0.0) d += b2 * fam.h0(t2).diagonal();
    Vec e(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) e(i) = std::exp(cplx(0.0, dt) * d(i));
    return e.asDiagonal();
  }
  const bool single_t = !fam.t_at || b2 == 0.0;
  if (!use_v && single_t) {
    Mat k = b1 * fam.h0(t1);
    if (b2 != 0.0) k += b2 * fam.h0(t2);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (k + k.adjoint()));
    Vec e(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < e.size(); ++i)
      e(i) = std::exp(cplx(0.0, dt * es.eigenvalues()(i)));
    Mat out = es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint();
    if (fam.t_at) {
      const Mat tt = fam.similarity(t1);
      out = tt * out * tt.partialPivLu().inverse();
    }
    return out;
  }
  Mat m = b1 * fam.h(t1, use_v);
  if (b2 != 0.0) m += b2 * fam.h(t2, use_v);
  const Mat arg = cplx(0.0, dt) * m;
  return arg.exp();
}

}  // namespace

Mat step_map(const HamiltonianFamily& fam, double t0, double t1, Scheme scheme, bool with_v) {
  const double dt = t1 - t0;
  switch (scheme) {
    case Scheme::magnus4: {
      const double ta = t0 + kC1 * dt, tb = t0 + kC2 * dt;
      const Mat first = exp_generator(fam, dt, ta, kA2, tb, kA1, with_v);
      const Mat second = exp_generator(fam, dt, ta, kA1, tb, kA2, with_v);
      return second * first;
    }
    case Scheme::exp_midpoint:
      return exp_generator(fam, dt, t0 + 0.5 * dt, 1.0, 0.0, 0.0, with_v);
    case Scheme::crank_nicolson: {
      const Mat h = fam.h(t0 + 0.5 * dt, with_v);
      const int n = fam.dim;
      const Mat a = Mat::Identity(n, n) - cplx(0.0, 0.5 * dt) * h;
      const Mat b = Mat::Identity(n, n) + cplx(0.0, 0.5 * dt) * h;
      return a.partialPivLu().solve(b);
    }
  }
  throw Error("unknown scheme");
}

namespace {

Propagator evolve_raw(const HamiltonianFamily& fam, double s, double t, const EvolveOptions& opt) {
  Propagator p;
  p.t_from = s;
  p.t_to = t;
  p.scheme = opt.scheme;
  const int n = fam.dim;
  p.u = Mat::Identity(n, n);
  if (s == t) return p;
  const double ss = compactify(s), st = compactify(t);
  const double span = st - ss;
  const int order = scheme_order(opt.scheme);

  if (!opt.adaptive) {
    const int m = std::max(1, opt.fixed_steps);
    for (int k = 0; k < m; ++k) {
      const double ta = decompactify(ss + span * k / m);
      const double tb = decompactify(ss + span * (k + 1) / m);
      p.u = step_map(fam, ta, tb, opt.scheme, opt.with_v) * p.u;
      if (opt.keep_trace) p.trace.push_back({ta, tb - ta, 0.0});
    }
    p.steps = m;
    p.est_error = 0.0;
    return p;
  }

  constexpr double kRoundoffFloor = 32.0 * std::numeric_limits<double>::epsilon();
  double h = span / 16.0;
  double sig = ss;
  std::vector<double> residuals;
  int evals = 0;
  while ((span > 0 && sig < st) || (span < 0 && sig > st)) {
    if (std::abs(h) > std::abs(st - sig)) h = st - sig;
    const double ta = decompactify(sig);
    const double tb = (sig + h == st) ? t : decompactify(sig + h);
    const double tm = decompactify(sig + 0.5 * h);
    const Mat s1 = step_map(fam, ta, tb, opt.scheme, opt.with_v);
    const Mat s2 =
        step_map(fam, tm, tb, opt.scheme, opt.with_v) * step_map(fam, ta, tm, opt.scheme, opt.with_v);
    evals += 3;
    const double est = (s1 - s2).norm() / (std::pow(2.0, order) - 1.0);
    if (!std::isfinite(est)) throw Error("evolve: non-finite step map");
    // estimates below a few ulps of a unitary step are roundoff, not truncation error
    const double loc_tol = std::max(opt.tol * std::abs(h) / std::abs(span), kRoundoffFloor);
    const bool tiny = std::abs(h) < 1e-13;
    if (est <= loc_tol || tiny) {
      p.u = s2 * p.u;
      sig += h;
      if (sig + h == sig) sig = st;
      p.est_error += est;
      p.steps += 2;
      if (opt.keep_trace) p.trace.push_back({ta, tb - ta, est});
      if (tiny && est > loc_tol) p.converged = false;
    }
    const double fac = est > 0 ? 0.9 * std::pow(loc_tol / est, 1.0 / order) : 2.0;
    h *= std::clamp(fac, 0.2, 2.0);
    if (evals > 3 * opt.max_steps) {
      p.converged = false;
      break;
    }
  }
  if (!p.u.allFinite()) throw Error("evolve: non-finite propagator entries");
  if (!p.converged || p.est_error > opt.tol * 1.0001 + p.steps * kRoundoffFloor) {
    p.converged = false;
    residuals.push_back(p.est_error);
    if (opt.throw_on_failure) {
      std::ostringstream os;
      os << "evolve: tolerance " << opt.tol << " not reached (estimate " << p.est_error
         << ", steps " << p.steps << ")";
      throw ConvergenceError(os.str(), residuals);
    }
  }
  return p;
}

}  // namespace

Propagator evolve(const HamiltonianFamily& fam, double s, double t, const EvolveOptions& opt) {
  if (!std::isfinite(s) || !std::isfinite(t)) throw Error("evolve: endpoints must be finite");
  const bool use_v = opt.with_v && fam.has_v();
  if (fam.t_at && fam.t_constant && !use_v) {
    // constant similarity: evolve H0 and conjugate once
    HamiltonianFamily inner = fam;
    inner.t_at = nullptr;
    inner.v_at = nullptr;
    const Mat tt = fam.similarity(0.0);
    Propagator p = evolve_raw(inner, s, t, opt);
    p.u = tt * p.u * tt.partialPivLu().inverse();
    return p;
  }
  return evolve_raw(fam, s, t, opt);
}

Mat phase(const HamiltonianFamily& fam, double t) {
  if (std::isinf(t)) throw Error("phase: undefined at infinite time");
  if (fam.diagonal) {
    const Vec d = fam.h0(t).diagonal();
    Vec e(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) e(i) = std::exp(cplx(0.0, t) * d(i));
    return e.asDiagonal();
  }
  const EigenSystem es = assemble_snapshot(fam, t, false);
  return apply_function_complex(es, [t](cplx l) { return std::exp(cplx(0.0, t) * l); });
}

IsometryReport check_l2t_isometry(const HamiltonianFamily& fam, const Propagator& prop,
                                  double isometry_tol, int n_probes, unsigned seed) {
  IsometryReport r;
  r.t_constant = fam.t_constant;
  const Mat ti_s = fam.similarity_inv(prop.t_from), ti_t = fam.similarity_inv(prop.t_to);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int k = 0; k < n_probes; ++k) {
    Vec u(fam.dim);
    for (int i = 0; i < fam.dim; ++i) u(i) = cplx(nd(rng), nd(rng));
    const double n0 = (ti_s * u).norm();
    const double n1 = (ti_t * (prop.u * u)).norm();
    r.drift = std::max(r.drift, std::abs(n1 - n0) / n0);
  }
  const double len = std::abs(prop.t_to - prop.t_from);
  r.drift_per_time = len > 0 ? r.drift / len : r.drift;
  const bool moving = !fam.t_constant && fam.t_at;
  if (moving || fam.has_v()) {
    // trapezoid on a compactified grid of ||T^-1 dT/dt|| + ||V||, both in L2_t
    const int m = 400;
    const double a = compactify(std::min(prop.t_from, prop.t_to));
    const double b = compactify(std::max(prop.t_from, prop.t_to));
    double integral = 0.0, prev_t = 0.0, prev_v = 0.0;
    for (int k = 0; k <= m; ++k) {
      const double tk = decompactify(a + (b - a) * k / m);
      double v = 0.0;
      if (moving) {
        const double eps = 1e-4 * bracket(tk);
        const Mat dT = (fam.similarity(tk + eps) - fam.similarity(tk - eps)) / (2.0 * eps);
        v += op_norm(fam.similarity_inv(tk) * dT);
      }
      if (fam.has_v()) v += op_norm(fam.similarity_inv(tk) * fam.v(tk) * fam.similarity(tk));
      if (k > 0) integral += 0.5 * (v + prev_v) * (tk - prev_t);
      prev_t = tk;
      prev_v = v;
    }
    r.gronwall_envelope = std::expm1(integral);
    r.tolerance = r.gronwall_envelope + isometry_tol * std::max(1.0, len);
  } else {
    r.tolerance = isometry_tol * std::max(1.0, len);
  }
  r.pass = r.drift <= r.tolerance;
  return r;
}

double composition_residual(const HamiltonianFamily& fam, double s, double r, double t,
                            const EvolveOptions& opt) {
  const Mat ts = evolve(fam, s, t, opt).u;
  const Mat tr = evolve(fam, r, t, opt).u;
  const Mat rs = evolve(fam, s, r, opt).u;
  return op_norm(ts - tr * rs);
}

std::string trace_csv(const Propagator& p) {
  std::ostringstream os;
  os.precision(17);
  os << "t,dt,est_error\n";
  for (const auto& s : p.trace) os << s.t << ',' << s.dt << ',' << s.est << '\n';
  return os.str();
}

}  // namespace lidx
