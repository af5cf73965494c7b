#include "lidx/circle_geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace lidx {

double Profile::operator()(double t) const {
  if (kind == "constant") return minus;
  if (t == kInf) return plus;
  if (t == -kInf) return minus;
  const double mid = 0.5 * (plus + minus), half = 0.5 * (plus - minus);
  if (kind == "tanh") return mid + half * std::tanh(t);
  if (kind == "algebraic")
    return mid + half * t / std::pow(1.0 + std::pow(std::abs(t), decay), 1.0 / decay);
  throw ConfigError("unknown profile kind '" + kind + "'");
}

double Profile::derivative(double t) const {
  if (kind == "constant" || std::isinf(t)) return 0.0;
  const double half = 0.5 * (plus - minus);
  if (kind == "tanh") {
    const double c = std::cosh(t);
    return half / (c * c);
  }
  return half * std::pow(1.0 + std::pow(std::abs(t), decay), -1.0 / decay - 1.0);
}

void CircleGeometry::validate() const {
  if (alpha != 0.0 && alpha != 0.5)
    throw ConfigError("alpha must be 0 or 1/2 (symmetric truncation only)");
  if (!(delta > 1.0)) throw ConfigError("delta must exceed 1");
  for (const Profile* p : {&c, &h, &a, &lapse_scale}) {
    if (p->kind != "constant" && p->kind != "algebraic" && p->kind != "tanh")
      throw ConfigError("unknown profile kind '" + p->kind + "'");
    if (!(p->decay > 0.0)) throw ConfigError("profile decay must be positive");
    if (!std::isfinite(p->minus) || !std::isfinite(p->plus))
      throw ConfigError("profile endpoints must be finite");
  }
  if (!(c.lower_bound() > 0.0)) throw ConfigError("lapse c must be positive");
  if (!(h.lower_bound() > 0.0)) throw ConfigError("metric coefficient h must be positive");
  double bsum = 0.0;
  for (double b : lapse_modes) bsum += std::abs(b);
  const double smax = std::max(std::abs(lapse_scale.minus), std::abs(lapse_scale.plus));
  if (bsum * smax >= 1.0) {
    std::ostringstream os;
    os << "lapse Fourier coefficients too large: sum|b_k| * max|s| = " << bsum * smax
       << " >= 1 (lapse would not stay positive)";
    throw InvalidInstance(os.str());
  }
}

std::vector<double> circle_modes(double alpha, int n_modes) {
  std::vector<double> m;
  for (int n = -n_modes - 1; n <= n_modes + 1; ++n) {
    const double v = n + alpha;
    if (std::abs(v) <= n_modes + 1e-12) m.push_back(v);
  }
  return m;
}

Mat cos_toeplitz(int dim, int k) {
  Mat c = Mat::Zero(dim, dim);
  if (k == 0) return Mat::Identity(dim, dim);
  for (int i = 0; i + k < dim; ++i) {
    c(i, i + k) = 0.5;
    c(i + k, i) = 0.5;
  }
  return c;
}

namespace {

Mat hermitian_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()));
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cast<cplx>().asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace

HamiltonianFamily build_circle_family(const CircleGeometry& geom, int n_modes) {
  geom.validate();
  if (n_modes < 4) throw ConfigError("n_modes must be at least 4");
  const std::vector<double> modes = circle_modes(geom.alpha, n_modes);
  const int dim = static_cast<int>(modes.size());
  int kmax = 0;
  for (std::size_t k = 0; k < geom.lapse_modes.size(); ++k)
    if (geom.lapse_modes[k] != 0.0) kmax = static_cast<int>(k) + 1;
  if (kmax > 0 && 4 * kmax > dim) {
    std::ostringstream os;
    os << "lapse bandwidth " << kmax << " exceeds truncation budget dim/4 = " << dim / 4;
    throw InvalidInstance(os.str());
  }

  RVec m(dim);
  for (int i = 0; i < dim; ++i) m(i) = modes[i];
  const CircleGeometry g = geom;

  auto a_diag = [g, m](double t) -> RVec {
    return ((m.array() + g.a(t)) / std::sqrt(g.h(t))).matrix();
  };
  Mat lapse_shape = Mat::Zero(dim, dim);
  for (std::size_t k = 0; k < geom.lapse_modes.size(); ++k)
    if (geom.lapse_modes[k] != 0.0)
      lapse_shape += geom.lapse_modes[k] * cos_toeplitz(dim, static_cast<int>(k) + 1);
  const Mat cos1 = cos_toeplitz(dim, 1);

  const bool fixed_t = geom.lapse_scale.is_constant();
  const Mat t_fixed =
      hermitian_sqrt(Mat::Identity(dim, dim) + geom.lapse_scale(0.0) * lapse_shape);
  auto t_of = [g, lapse_shape, dim, fixed_t, t_fixed](double t) -> Mat {
    if (fixed_t) return t_fixed;
    return hermitian_sqrt(Mat::Identity(dim, dim) + g.lapse_scale(t) * lapse_shape);
  };
  const bool lapse = kmax > 0;

  auto h0_of = [g, a_diag, t_of, lapse, cos1](double t) -> Mat {
    const Mat a = a_diag(t).cast<cplx>().asDiagonal();
    Mat h0;
    if (lapse) {
      const Mat tt = t_of(t);
      h0 = g.c(t) * tt * a * tt;
      h0 = 0.5 * (h0 + h0.adjoint());
    } else {
      h0 = g.c(t) * a;
    }
    if (g.bump != 0.0 && !std::isinf(t)) h0 += g.bump * std::pow(bracket(t), -g.delta) * cos1;
    return h0;
  };

  HamiltonianFamily fam;
  fam.dim = dim;
  fam.delta = geom.delta;
  fam.h0_at = h0_of;
  fam.h0_minus = h0_of(-kInf);
  fam.h0_plus = h0_of(kInf);
  if (lapse) {
    fam.t_at = t_of;
    fam.t_minus = t_of(-kInf);
    fam.t_plus = t_of(kInf);
    fam.t_constant = geom.lapse_scale.is_constant();
  } else {
    fam.t_minus = fam.t_plus = Mat::Identity(dim, dim);
    fam.t_constant = true;
  }
  if (geom.v_amp != 0.0) {
    const double amp = geom.v_amp, d = geom.delta;
    fam.v_at = [cos1, amp, d](double t) -> Mat {
      return cplx(0.0, amp * std::pow(bracket(t), -d)) * cos1;
    };
  }
  fam.diagonal = !lapse && geom.bump == 0.0 && geom.v_amp == 0.0;
  std::ostringstream os;
  os << "circle(alpha=" << geom.alpha << ",dim=" << dim << ")";
  fam.label = os.str();
  return fam;
}

std::vector<double> closed_form_spectrum(const CircleGeometry& geom, double t, int n_modes) {
  if (!geom.spatially_constant_lapse())
    throw ConfigError("closed_form_spectrum requires a spatially constant lapse");
  std::vector<double> out;
  for (double m : circle_modes(geom.alpha, n_modes))
    out.push_back(geom.c(t) * (m + geom.a(t)) / std::sqrt(geom.h(t)));
  std::sort(out.begin(), out.end());
  return out;
}

// ------------------------------------------------------------------ eta

double hurwitz_zeta(double s, double a, int k_terms) {
  static constexpr std::array<double, 8> b2j = {1.0 / 6,     -1.0 / 30,      1.0 / 42,
                                                -1.0 / 30,   5.0 / 66,       -691.0 / 2730,
                                                7.0 / 6,     -3617.0 / 510};
  if (s == 1.0) return kInf;
  double sum = 0.0;
  for (int n = 0; n < k_terms; ++n) sum += std::pow(n + a, -s);
  const double x = k_terms + a;
  sum += std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
  // sum_j B_2j/(2j)! (s)_(2j-1) x^(-s-2j+1)
  double poch = s;   // rising factorial (s)_(2j-1)
  double fact = 2.0; // (2j)!
  for (std::size_t j = 1; j <= b2j.size(); ++j) {
    sum += b2j[j - 1] / fact * poch * std::pow(x, -s - 2.0 * j + 1.0);
    poch *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
    fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
  }
  return sum;
}

namespace {

double frac_part(double b) {
  double f = b - std::floor(b);
  if (f > 1.0 - 1e-12 || f < 1e-12) f = 0.0;
  return f;
}

double direct_eta(double s, double b) {
  const double f = frac_part(b);
  if (f == 0.0) return 0.0;
  // plain partial sums with the leading integral tail only
  const int m = 20000;
  auto z = [&](double a) {
    double acc = 0.0;
    for (int n = 0; n < m; ++n) acc += std::pow(n + a, -s);
    const double x = m + a;
    return acc + std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
  };
  return z(f) - z(1.0 - f);
}

}  // namespace

double lattice_eta(double s, double b, int k_terms) {
  const double f = frac_part(b);
  if (f == 0.0) return 0.0;
  return hurwitz_zeta(s, f, k_terms) - hurwitz_zeta(s, 1.0 - f, k_terms);
}

EtaResult eta_invariant(double b, EtaMethod method, double eta_tol) {
  EtaResult r;
  const double f = frac_part(b);
  r.kernel_dim = f == 0.0 ? 1 : 0;
  if (method == EtaMethod::hurwitz) {
    r.value = f == 0.0 ? 0.0 : 1.0 - 2.0 * f;
    return r;
  }
  const double v10 = lattice_eta(0.0, b, 10);
  const double v20 = lattice_eta(0.0, b, 20);
  r.value = v20;
  r.error_estimate = std::abs(v20 - v10);
  double res = 0.0;
  for (double s : {2.0, 2.5, 3.0, 3.5, 4.0})
    res = std::max(res, std::abs(lattice_eta(s, b, 20) - direct_eta(s, b)));
  r.validation_residual = res;
  r.flagged = r.error_estimate > eta_tol || res > eta_tol;
  return r;
}

ApsRhs aps_rhs_circle(const CircleGeometry& geom, EtaMethod method) {
  ApsRhs r;
  const double bp = geom.alpha + geom.a.plus;
  const double bm = geom.alpha + geom.a.minus;
  const EtaResult ep = eta_invariant(bp, method), em = eta_invariant(bm, method);
  r.eta_plus = ep.value;
  r.eta_minus = em.value;
  r.ker_plus = ep.kernel_dim;
  r.ker_minus = em.kernel_dim;
  r.geometric_terms = 0.0;
  r.rhs_value = r.geometric_terms + 0.5 * (r.eta_plus - r.eta_minus - r.ker_plus - r.ker_minus);
  if (geom.twisted())
    r.caveats.push_back("twisted coefficients: geometric formula not asserted");
  if (ep.flagged || em.flagged) r.caveats.push_back("eta continuation residual above tolerance");
  return r;
}

int crossing_count_oracle(const CircleGeometry& geom, int n_modes) {
  int sf = 0;
  for (double m : circle_modes(geom.alpha, n_modes)) {
    const double lm = m + geom.a.minus, lp = m + geom.a.plus;
    const bool in_m = lm >= -1e-12, in_p = lp >= -1e-12;
    if (!in_m && in_p) ++sf;
    if (in_m && !in_p) --sf;
  }
  return sf;
}

}  // namespace lidx
