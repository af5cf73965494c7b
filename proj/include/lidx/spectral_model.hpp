#pragma once

#include "lidx/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lidx {

using MatFn = std::function<Mat(double)>;
using RealFn = std::function<double(double)>;

/// Time-dependent family H(t) = T(t) H0(t) T(t)^-1 (+ V(t)).
/// Time arguments may be +-inf; the endpoint data is used there and V vanishes.
struct HamiltonianFamily {
  int dim = 0;
  MatFn h0_at;          // Hermitian H0(t)
  MatFn t_at;           // similarity T(t); empty means identity
  MatFn v_at;           // optional perturbation, empty means absent
  Mat h0_minus, h0_plus;
  Mat t_minus, t_plus;  // identity when t_at is empty
  double delta = 2.0;
  bool diagonal = false;    // H0 diagonal and T = I for all t, no V
  bool t_constant = true;   // T independent of t
  std::string label;

  bool has_v() const { return static_cast<bool>(v_at); }
  Mat h0(double t) const;
  Mat similarity(double t) const;
  Mat similarity_inv(double t) const;
  Mat v(double t) const;
  /// H(t); with_v=false drops the perturbation.
  Mat h(double t, bool with_v = true) const;
  Mat h_plus() const { return h(kInf, false); }
  Mat h_minus() const { return h(-kInf, false); }
  /// G(t) = T(t)^-* T(t)^-1.
  Mat weight(double t) const;

  /// Family with constant H0 and T = I.
  static HamiltonianFamily constant(const Mat& h0);
  /// Diagonal family from per-mode eigenvalue curves.
  static HamiltonianFamily diagonal_family(int dim, std::function<RVec(double)> eig, double delta);
};

/// Eigendecomposition of a snapshot H = V diag(lambda) V^-1.
struct EigenSystem {
  RVec eigenvalues;   // ascending (real parts when not self-adjoint)
  RVec imag_parts;
  Mat vectors;        // columns, G-orthonormal when self_adjoint
  Mat inverse;        // V^-1
  Mat weight;         // G
  double scale = 0.0; // ||H||
  bool self_adjoint = true;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  Mat reconstruct() const;
};

/// Hermitian path: H = T H0 T^-1 with H0 Hermitian.
EigenSystem eigensystem_similar(const Mat& h0, const Mat& t, const Mat& t_inv);
EigenSystem eigensystem_hermitian(const Mat& h0);
/// General (non-normal) path with biorthogonal systems.
EigenSystem eigensystem_general(const Mat& h, const Mat& weight);

EigenSystem assemble_snapshot(const HamiltonianFamily& fam, double t, bool with_v = true);
/// Eigensystem of H0(t) itself (self-adjoint reference).
EigenSystem reference_snapshot(const HamiltonianFamily& fam, double t);

enum class Side { below, above };

/// Half-line spectral cut. below: (-inf,a) or (-inf,a]; above: (a,inf) or [a,inf).
/// Eigenvalues within gap_tol of the threshold are treated as lying on it
/// (include_threshold decides them) unless require_gap is set, in which case
/// GapTooSmall is raised.
struct SpectralCut {
  double threshold = 0.0;
  Side side = Side::below;
  bool include_threshold = false;
  bool require_gap = false;

  SpectralCut complement() const;
  std::string describe() const;

  static SpectralCut negative() { return {0.0, Side::below, false, false}; }
  static SpectralCut nonpositive() { return {0.0, Side::below, true, false}; }
  static SpectralCut nonnegative() { return {0.0, Side::above, true, false}; }
  static SpectralCut positive() { return {0.0, Side::above, false, false}; }
};

/// Default gap tolerance 1e-9 ||H||.
double default_gap_tol(const EigenSystem& es);

std::vector<int> select_indices(const EigenSystem& es, const SpectralCut& cut, double gap_tol = -1.0);
int cut_rank(const EigenSystem& es, const SpectralCut& cut, double gap_tol = -1.0);
Mat spectral_projection(const EigenSystem& es, const SpectralCut& cut, double gap_tol = -1.0);

/// f(H) = V f(Lambda) V^-1, f applied to (real parts of) eigenvalues.
Mat apply_function(const EigenSystem& es, const RealFn& f);
Mat apply_function_complex(const EigenSystem& es, const std::function<cplx(cplx)>& f);
/// Lambda = <H> = sqrt(1 + H^2).
Mat lambda_operator(const EigenSystem& es);

/// Test functions with closed-form derivatives for the almost analytic extension.
struct SmoothFunction {
  std::string name;
  RealFn value;
  std::function<double(double, int)> derivative;  // k-th derivative
  static SmoothFunction lorentzian();                 // (1 + x^2)^-1
  static SmoothFunction gaussian(double width = 1.0); // exp(-x^2 / (2 w^2))
};

struct ContourGrid {
  double length_scale = 1.0;  // L in x = lambda + L u / (1 - u^2)
  int panels = 16;
  int order = 16;             // Gauss points per panel per direction
  int max_doublings = 5;
};

struct HsResult {
  Mat value;
  double residual = 0.0;      // panel-doubling difference
  int panels_used = 0;
};

/// Almost-analytic (Helffer-Sjostrand) evaluation of f(H); validation only.
HsResult helffer_sjostrand_apply(const EigenSystem& es, const SmoothFunction& f, int aa_order,
                                 const ContourGrid& grid = {}, double hs_tol = 1e-6);
/// Scalar version for a single eigenvalue.
double helffer_sjostrand_scalar(double lambda, const SmoothFunction& f, int aa_order,
                                const ContourGrid& grid);

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  int samples = 0;
  bool exact = false;            // all differences vanish
  bool matches_exponent = false; // |slope + delta| <= slope_tol
  bool pass = false;             // decay at least as fast as <t>^-delta
  double delta = 0.0;
  double max_difference = 0.0;
};

DecayFit verify_decay_hypothesis(const HamiltonianFamily& fam, const std::vector<double>& t_grid,
                                 double slope_tol = 0.3, double tail_start = 4.0);

/// CSV of eigenvalues per t: header "t,index,eigenvalue,imag".
std::string snapshot_csv(const HamiltonianFamily& fam, const std::vector<double>& t_grid);

}  // namespace lidx
