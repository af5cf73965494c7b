#include "lidx/fredholm_abstract.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace lidx {

namespace {

Mat gaussian(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> nd;
  Mat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = cplx(nd(rng), nd(rng)) / std::sqrt(2.0);
  return m;
}

Mat random_unitary(std::mt19937_64& rng, int n) {
  const Mat g = gaussian(rng, n, n);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  // fix the phase ambiguity of the factorization
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    const double a = std::abs(r(i, i));
    if (a > 0) q.col(i) *= r(i, i) / a;
  }
  return q;
}

Mat stack(const Mat& a, const Mat& b) {
  Mat out(a.rows() + b.rows(), std::max(a.cols(), b.cols()));
  if (a.rows()) out.topRows(a.rows()) = a;
  if (b.rows()) out.bottomRows(b.rows()) = b;
  return out;
}

std::vector<int> range(int from, int to) {
  std::vector<int> v;
  for (int i = from; i < to; ++i) v.push_back(i);
  return v;
}

Mat rows_of(const Mat& m, const std::vector<int>& rows) {
  return submatrix(m, rows, range(0, static_cast<int>(m.cols())));
}

Mat mask_projection(const Mat& b, const std::vector<int>& coords) {
  const int n = static_cast<int>(b.rows());
  RVec d = RVec::Zero(n);
  for (int i : coords) d(i) = 1.0;
  return b * d.cast<cplx>().asDiagonal() * b.partialPivLu().inverse();
}

// (rho + P)^{-1} applied to (0 + 1)
Mat data_inverse_y(const Mat& rho, const Mat& p) {
  const Mat a = stack(rho, p);
  const int h = static_cast<int>(rho.rows()), y = static_cast<int>(p.rows());
  Mat rhs = Mat::Zero(h + y, y);
  rhs.bottomRows(y) = Mat::Identity(y, y);
  return a.partialPivLu().solve(rhs);
}

Mat data_inverse_h(const Mat& rho, const Mat& p) {
  const Mat a = stack(rho, p);
  const int h = static_cast<int>(rho.rows()), y = static_cast<int>(p.rows());
  Mat rhs = Mat::Zero(h + y, h);
  rhs.topRows(h) = Mat::Identity(h, h);
  return a.partialPivLu().solve(rhs);
}

// rho = pi_-^+ rho_- + pi_+^- rho_+ in coordinates of H_-^+ and H_+^-
Mat aps_map(const AbstractInstance& inst) {
  const Mat cm = inst.b_minus.partialPivLu().solve(inst.rho_minus);
  const Mat cp = inst.b_plus.partialPivLu().solve(inst.rho_plus);
  return stack(rows_of(cm, inst.plus_minus), rows_of(cp, inst.minus_plus));
}

}  // namespace

Mat AbstractInstance::pi_plus(bool minus_part) const {
  return mask_projection(b_plus, minus_part ? minus_plus : plus_plus);
}

Mat AbstractInstance::pi_minus(bool minus_part) const {
  return mask_projection(b_minus, minus_part ? minus_minus : plus_minus);
}

AbstractInstance random_instance(int dim_x, int dim_y, int dim_h, unsigned long long seed,
                                 const InstanceOptions& opt) {
  if (dim_x <= 0 || dim_y < 0 || dim_h <= 0)
    throw InvalidInstance("random_instance: dimensions must be positive");
  if (dim_x != dim_h + dim_y) {
    std::ostringstream os;
    os << "random_instance: dim X = " << dim_x << " must equal dim H + dim Y = " << dim_h + dim_y;
    throw InvalidInstance(os.str());
  }
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < opt.resample_budget; ++attempt) {
    AbstractInstance inst;
    inst.dim_x = dim_x;
    inst.dim_y = dim_y;
    inst.dim_h = dim_h;
    inst.seed = seed;
    inst.resamples = attempt;
    inst.p = gaussian(rng, dim_y, dim_x);
    inst.rho_minus = gaussian(rng, dim_h, dim_x);
    inst.b_plus = gaussian(rng, dim_h, dim_h);
    inst.b_minus = gaussian(rng, dim_h, dim_h);
    std::uniform_int_distribution<int> rk(0, dim_h);
    const int rp = rk(rng), rm = rk(rng);
    inst.minus_plus = range(0, rp);
    inst.plus_plus = range(rp, dim_h);
    inst.minus_minus = range(0, rm);
    inst.plus_minus = range(rm, dim_h);
    if (opt.force_wmp_zero || opt.wmp_scale != 1.0) {
      // rho_+ = W rho_- + M P with a prescribed W in projection coordinates
      Mat wc = gaussian(rng, dim_h, dim_h);
      for (int i : inst.minus_plus)
        for (int j : inst.plus_minus) wc(i, j) = opt.force_wmp_zero ? cplx(0.0) : opt.wmp_scale * wc(i, j);
      const Mat w = inst.b_plus * wc * inst.b_minus.partialPivLu().inverse();
      inst.rho_plus = w * inst.rho_minus + gaussian(rng, dim_h, dim_y) * inst.p;
    } else {
      inst.rho_plus = gaussian(rng, dim_h, dim_x);
    }
    inst.cond_plus = condition_number(stack(inst.rho_plus, inst.p));
    inst.cond_minus = condition_number(stack(inst.rho_minus, inst.p));
    const double cb = std::max(condition_number(inst.b_plus), condition_number(inst.b_minus));
    // rho must map onto H_-^+ + H_+^-, otherwise the two indices differ by its cokernel
    const Mat rho = aps_map(inst);
    if (numerical_rank(rho).rank != rho.rows()) continue;
    if (inst.cond_plus <= opt.cond_bound && inst.cond_minus <= opt.cond_bound && cb <= opt.cond_bound)
      return inst;
  }
  throw InvalidInstance("random_instance: resample budget exhausted");
}

AbstractInstance chain_instance(int n, int k, unsigned long long seed) {
  if (n <= 0 || k <= 0) throw InvalidInstance("chain_instance: n and k must be positive");
  std::mt19937_64 rng(seed);
  AbstractInstance inst;
  inst.dim_h = n;
  inst.dim_y = n * k;
  inst.dim_x = n * (k + 1);
  inst.seed = seed;
  inst.p = Mat::Zero(inst.dim_y, inst.dim_x);
  for (int j = 0; j < k; ++j) {
    inst.p.block(j * n, j * n, n, n) = -random_unitary(rng, n);
    inst.p.block(j * n, (j + 1) * n, n, n) = Mat::Identity(n, n);
  }
  inst.rho_minus = Mat::Zero(n, inst.dim_x);
  inst.rho_minus.leftCols(n) = Mat::Identity(n, n);
  inst.rho_plus = Mat::Zero(n, inst.dim_x);
  inst.rho_plus.rightCols(n) = random_unitary(rng, n);
  inst.b_plus = random_unitary(rng, n);
  inst.b_minus = random_unitary(rng, n);
  std::uniform_int_distribution<int> rk(0, n);
  const int rp = rk(rng), rm = rk(rng);
  inst.minus_plus = range(0, rp);
  inst.plus_plus = range(rp, n);
  inst.minus_minus = range(0, rm);
  inst.plus_minus = range(rm, n);
  inst.cond_plus = condition_number(stack(inst.rho_plus, inst.p));
  inst.cond_minus = condition_number(stack(inst.rho_minus, inst.p));
  return inst;
}

Mat rho_minus_inverse(const AbstractInstance& inst) {
  return data_inverse_h(inst.rho_minus, inst.p);
}

AbstractScattering scattering_from_instance(const AbstractInstance& inst) {
  const RankInfo rp = numerical_rank(inst.p);
  if (inst.dim_x - rp.rank < inst.dim_h)
    throw InvalidInstance("scattering_from_instance: ker P too small for dim H");
  AbstractScattering s;
  s.w = inst.rho_plus * rho_minus_inverse(inst);
  s.w_inv_formula = inst.rho_minus * data_inverse_h(inst.rho_plus, inst.p);
  s.inverse_residual = op_norm(s.w * s.w_inv_formula - Mat::Identity(inst.dim_h, inst.dim_h));
  s.coords = inst.b_plus.partialPivLu().solve(s.w * inst.b_minus);
  s.mm = submatrix(s.coords, inst.minus_plus, inst.minus_minus);
  s.mp = submatrix(s.coords, inst.minus_plus, inst.plus_minus);
  s.pm = submatrix(s.coords, inst.plus_plus, inst.minus_minus);
  s.pp = submatrix(s.coords, inst.plus_plus, inst.plus_minus);
  Mat re = Mat::Zero(inst.dim_h, inst.dim_h);
  auto put = [&](const Mat& blk, const std::vector<int>& r, const std::vector<int>& c) {
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) re(r[i], c[j]) = blk(i, j);
  };
  put(s.mm, inst.minus_plus, inst.minus_minus);
  put(s.mp, inst.minus_plus, inst.plus_minus);
  put(s.pm, inst.plus_plus, inst.minus_minus);
  put(s.pp, inst.plus_plus, inst.plus_minus);
  s.recomposition_residual = op_norm(inst.b_plus * re * inst.b_minus.partialPivLu().inverse() - s.w);
  return s;
}

RankInfo numerical_rank(const Mat& m, double rel_tol) {
  RankInfo r;
  if (m.size() == 0) return r;
  Eigen::JacobiSVD<Mat> svd(m);
  const RVec& s = svd.singularValues();
  const double cut = rel_tol * std::max(1.0, s(0));
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++r.rank;
    if (s(i) >= 0.1 * cut && s(i) <= 10.0 * cut) r.ambiguous = true;
  }
  return r;
}

Mat kernel_basis(const Mat& m, double rel_tol) {
  const int n = static_cast<int>(m.cols());
  if (m.rows() == 0 || n == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const int r = numerical_rank(m, rel_tol).rank;
  return svd.matrixV().rightCols(n - r);
}

SumIndexCheck check_sum_index(const Mat& k, const Mat& l, double rel_tol) {
  SumIndexCheck c;
  const int x = static_cast<int>(l.cols()), f = static_cast<int>(l.rows()),
            e = static_cast<int>(k.rows());
  const int rl = numerical_rank(l, rel_tol).rank;
  if (rl != f || x == 0) {
    c.applicable = false;
    return c;
  }
  Mat v = Mat::Identity(x, x);
  if (f > 0) v = Eigen::JacobiSVD<Mat>(l, Eigen::ComputeFullV).matrixV();
  const Mat zk = v.leftCols(rl);
  const Mat zker = v.rightCols(x - rl);
  const Mat lz = l * zk;
  Mat lhs(f + e, x);
  lhs << lz, l * zker, k * zk, k * zker;
  Mat f1 = Mat::Identity(f + e, f + e);
  f1.bottomLeftCorner(e, f) = k * zk * lz.partialPivLu().inverse();
  Mat f2 = Mat::Zero(f + e, f + (x - rl));
  f2.topLeftCorner(f, f) = Mat::Identity(f, f);
  f2.bottomRightCorner(e, x - rl) = k * zker;
  Mat f3 = Mat::Zero(f + (x - rl), x);
  f3.topLeftCorner(f, rl) = lz;
  f3.bottomRightCorner(x - rl, x - rl) = Mat::Identity(x - rl, x - rl);
  c.factorization_residual = op_norm(lhs - f1 * f2 * f3);
  // indices by rank
  Mat sum(f + e, x);
  sum << l, k;
  const int rs = numerical_rank(sum, rel_tol).rank;
  c.index_sum = (x - rs) - (f + e - rs);
  const Mat kr = k * zker;
  const int rk = numerical_rank(kr, rel_tol).rank;
  c.index_restricted = ((x - rl) - rk) - (e - rk);
  c.equal = c.index_sum == c.index_restricted;
  return c;
}

EqualIndexReport verify_equal_index(const AbstractInstance& inst) {
  EqualIndexReport r;
  const AbstractScattering s = scattering_from_instance(inst);
  const RankInfo rw = numerical_rank(s.mm);
  const int dom = static_cast<int>(s.mm.cols()), cod = static_cast<int>(s.mm.rows());
  r.index_wmm = (dom - rw.rank) - (cod - rw.rank);
  const Mat rho = aps_map(inst);
  const Mat z = kernel_basis(rho);
  const Mat a = inst.p * z;
  const RankInfo ra = numerical_rank(a);
  const int k = static_cast<int>(z.cols());
  r.index_p_ker_rho = (k - ra.rank) - (inst.dim_y - ra.rank);
  r.rank_ambiguous = rw.ambiguous || ra.ambiguous || numerical_rank(rho).ambiguous;
  r.equal = r.index_wmm == r.index_p_ker_rho;
  r.sum_rho_p = check_sum_index(rho, inst.p);
  r.sum_p_rho = check_sum_index(inst.p, rho);
  r.factorization_residual = std::max(r.sum_rho_p.applicable ? r.sum_rho_p.factorization_residual : 0.0,
                                      r.sum_p_rho.applicable ? r.sum_p_rho.factorization_residual : 0.0);
  return r;
}

QFormulaReport verify_q_formula(const AbstractInstance& inst) {
  QFormulaReport q;
  const RankInfo rp = numerical_rank(inst.p);
  if (rp.rank != inst.dim_y) {
    q.surjective = false;
    throw InvalidInstance("verify_q_formula: P is not surjective");
  }
  const int x = inst.dim_x, y = inst.dim_y;
  const Mat pm_inv = data_inverse_y(inst.rho_plus, inst.p);   // P_-^{-1}
  const Mat pp_inv = data_inverse_y(inst.rho_minus, inst.p);  // P_+^{-1}
  const Mat rm_inv = rho_minus_inverse(inst);
  const Mat pi_mp = inst.pi_minus(false);                     // pi_-^+
  const Mat qm = (Mat::Identity(x, x) - rm_inv * pi_mp * inst.rho_minus) * pm_inv;
  q.pq_residual = op_norm(inst.p * qm - Mat::Identity(y, y));

  const Mat rho = aps_map(inst);
  const Mat rq = rho * qm;
  q.rho_q_norm = op_norm(rq);
  const AbstractScattering s = scattering_from_instance(inst);
  const Mat cw = inst.b_plus.partialPivLu().solve(s.w * pi_mp * inst.rho_minus);
  Mat k1 = Mat::Zero(rho.rows(), y);
  if (!inst.minus_plus.empty())
    k1.bottomRows(inst.minus_plus.size()) = -rows_of(cw, inst.minus_plus) * (pm_inv - pp_inv);
  q.k1_residual = op_norm(rq - k1);
  q.rank_rho_q = numerical_rank(rq, 1e-9).rank;
  q.rank_wmp = numerical_rank(s.mp, 1e-9).rank;
  if (q.rho_q_norm < 1e-10) q.rank_rho_q = 0;

  // pseudo-inverse based Fredholm inverse of P on ker rho
  const Mat z = kernel_basis(rho);
  const Mat a = inst.p * z;
  const int ra = numerical_rank(a).rank;
  Mat pinv = Mat::Zero(a.cols(), a.rows());
  if (a.size() > 0) {
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    for (int i = 0; i < ra; ++i)
      pinv += svd.matrixV().col(i) * (1.0 / svd.singularValues()(i)) * svd.matrixU().col(i).adjoint();
  }
  const Mat fred = z * pinv;
  q.rank_difference = numerical_rank(qm - fred, 1e-9).rank;
  const int rk1 = numerical_rank(k1, 1e-9).rank;
  const int ker_a = static_cast<int>(a.cols()) - ra, coker_a = static_cast<int>(a.rows()) - ra;
  q.rank_bound = 2 * rk1 + ker_a + coker_a;
  q.rank_ok = q.rank_difference <= q.rank_bound && q.rank_rho_q <= q.rank_wmp;
  return q;
}

ChainPositivity chain_positivity(const AbstractInstance& chain, int n, int k, const Vec& f) {
  const int x = chain.dim_x;
  const Mat pm_inv = data_inverse_y(chain.rho_plus, chain.p);
  const Mat rm_inv = rho_minus_inverse(chain);
  const Mat pi_mp = chain.pi_minus(false);
  const Vec u = pm_inv * f;
  const Vec r = chain.rho_minus * u;
  const Vec diff = -(rm_inv * (pi_mp * r));  // (Q - P_-^{-1}) f
  cplx lhs = 0.0;
  for (int j = 0; j < k; ++j) lhs += f.segment(j * n, n).dot(diff.segment((j + 1) * n, n));
  (void)x;
  ChainPositivity c;
  c.lhs = lhs.real();
  c.lhs_imag = lhs.imag();
  c.rhs = (pi_mp * r).squaredNorm();
  return c;
}

}  // namespace lidx
