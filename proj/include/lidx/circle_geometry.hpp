#pragma once

#include "lidx/spectral_model.hpp"

#include <string>
#include <vector>

namespace lidx {

/// Interpolating profile between endpoint values.
/// algebraic: mid + half * t / (1 + |t|^p)^(1/p)   (approaches the ends like |t|^-p)
/// tanh:      mid + half * tanh(t)                 (exponential approach)
/// constant:  minus value everywhere
struct Profile {
  std::string kind = "algebraic";
  double minus = 1.0;
  double plus = 1.0;
  double decay = 2.0;

  static Profile constant(double v) { return {"constant", v, v, 2.0}; }
  static Profile algebraic(double m, double p, double decay = 2.0) {
    return {"algebraic", m, p, decay};
  }
  double operator()(double t) const;
  double derivative(double t) const;
  bool is_constant() const { return kind == "constant" || minus == plus; }
  double lower_bound() const { return std::min(minus, plus); }
  double upper_bound() const { return std::max(minus, plus); }
};

struct CircleGeometry {
  Profile c = Profile::constant(1.0);   // lapse
  Profile h = Profile::constant(1.0);   // metric coefficient
  Profile a = Profile::constant(0.0);   // flat twist
  double alpha = 0.5;                   // spin structure: 0 or 1/2
  double delta = 2.0;
  std::vector<double> lapse_modes;      // b_k, c(t,theta) = c(t)(1 + s(t) sum b_k cos k theta)
  Profile lapse_scale = Profile::constant(1.0);  // s(t)
  double bump = 0.0;                    // eps <t>^-delta cos(theta) added to H0
  double v_amp = 0.0;                   // V = i v_amp <t>^-delta cos(theta)

  bool twisted() const { return a.minus != 0.0 || a.plus != 0.0; }
  bool spatially_constant_lapse() const { return lapse_modes.empty(); }
  void validate() const;
};

/// Mode labels n + alpha with |n + alpha| <= n_modes, ascending.
std::vector<double> circle_modes(double alpha, int n_modes);

/// Toeplitz matrix of multiplication by cos(k theta) on the mode basis.
Mat cos_toeplitz(int dim, int k);

HamiltonianFamily build_circle_family(const CircleGeometry& geom, int n_modes);

/// c(t)(n + alpha + a(t)) / sqrt(h(t)) over the truncated modes, ascending.
std::vector<double> closed_form_spectrum(const CircleGeometry& geom, double t, int n_modes);

enum class EtaMethod { hurwitz, partial_sum_zeta };

struct EtaResult {
  double value = 0.0;
  double error_estimate = 0.0;
  double validation_residual = 0.0;  // continuation vs direct sums on s in [2,4]
  bool flagged = false;
  int kernel_dim = 0;
};

/// Hurwitz zeta zeta(s, a), a in (0, 1], by Euler-Maclaurin with k_terms direct terms.
double hurwitz_zeta(double s, double a, int k_terms = 20);

/// eta(s) of the lattice {n + b}, zero mode excluded.
double lattice_eta(double s, double b, int k_terms = 20);

EtaResult eta_invariant(double b, EtaMethod method, double eta_tol = 1e-6);

struct ApsRhs {
  double eta_plus = 0.0, eta_minus = 0.0;
  int ker_plus = 0, ker_minus = 0;
  double geometric_terms = 0.0;
  double rhs_value = 0.0;
  std::vector<std::string> caveats;
};

ApsRhs aps_rhs_circle(const CircleGeometry& geom, EtaMethod method = EtaMethod::hurwitz);

/// Signed count of zero crossings of the closed-form curves between t = -inf and +inf
/// (each curve counted by sign change of n + alpha + a between the endpoints).
int crossing_count_oracle(const CircleGeometry& geom, int n_modes);

}  // namespace lidx
