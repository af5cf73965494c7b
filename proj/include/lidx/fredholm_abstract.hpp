#pragma once

#include "lidx/types.hpp"

#include <string>
#include <vector>

namespace lidx {

/// Finite model: P: X -> Y, rho_+-: X -> H_+-, projection pairs on H_+-.
/// pi_plus_minus projects onto the "-" part of H_+, pi_minus_plus onto the "+" part of H_-.
struct AbstractInstance {
  int dim_x = 0, dim_y = 0, dim_h = 0;
  Mat p, rho_plus, rho_minus;
  Mat b_plus, b_minus;                 // projection bases: pi = B diag(mask) B^-1
  std::vector<int> minus_plus;         // coordinates (in B_+ basis) of H_+^-
  std::vector<int> plus_plus;          // coordinates of H_+^+
  std::vector<int> minus_minus;        // coordinates (in B_- basis) of H_-^-
  std::vector<int> plus_minus;         // coordinates of H_-^+
  double cond_plus = 0.0, cond_minus = 0.0;
  unsigned long long seed = 0;
  int resamples = 0;

  Mat pi_plus(bool minus_part) const;   // pi_+^- or pi_+^+
  Mat pi_minus(bool minus_part) const;  // pi_-^- or pi_-^+
};

struct InstanceOptions {
  double cond_bound = 1e4;
  int resample_budget = 50;
  bool force_wmp_zero = false;   // construct rho_+ so that W^{-+} = 0
  double wmp_scale = 1.0;        // scale of W^{-+} when constructed
};

/// dims = (dim X, dim Y, dim H) with dim X = dim H + dim Y.
AbstractInstance random_instance(int dim_x, int dim_y, int dim_h, unsigned long long seed,
                                 const InstanceOptions& opt = {});

/// Chain model: X = (C^n)^{k+1}, Y = (C^n)^k, (Pu)_j = u_{j+1} - Phi_j u_j,
/// rho_- u = u_0, rho_+ u = S u_k with random unitaries Phi_j, S.
AbstractInstance chain_instance(int n, int k, unsigned long long seed);

struct AbstractScattering {
  Mat w, w_inv_formula;               // W = rho_+ rho_-^{-1}, rho_- rho_+^{-1}
  Mat coords;                         // B_+^-1 W B_-
  Mat pp, pm, mp, mm;                 // W^{++}, W^{+-}, W^{-+}, W^{--}
  double inverse_residual = 0.0;      // ||W * (rho_- rho_+^-1) - 1||
  double recomposition_residual = 0.0;
};

/// rho_-^{-1} = (rho_- + P)^{-1}(1 + 0).
Mat rho_minus_inverse(const AbstractInstance& inst);
AbstractScattering scattering_from_instance(const AbstractInstance& inst);

/// numerical rank with relative threshold; flags values in [0.1, 10] * tol
struct RankInfo {
  int rank = 0;
  bool ambiguous = false;
};
RankInfo numerical_rank(const Mat& m, double rel_tol = 1e-10);
/// orthonormal kernel basis (columns)
Mat kernel_basis(const Mat& m, double rel_tol = 1e-10);

struct SumIndexCheck {
  double factorization_residual = 0.0;
  int index_sum = 0;        // ind(L + K)
  int index_restricted = 0; // ind(K|ker L)
  bool equal = false;
  bool applicable = true;   // L surjective
};

/// L + K vs K restricted to ker L, with the three-factor identity.
SumIndexCheck check_sum_index(const Mat& k, const Mat& l, double rel_tol = 1e-10);

struct EqualIndexReport {
  int index_wmm = 0;
  int index_p_ker_rho = 0;
  bool equal = false;
  bool rank_ambiguous = false;
  SumIndexCheck sum_rho_p, sum_p_rho;
  double factorization_residual = 0.0;
};

EqualIndexReport verify_equal_index(const AbstractInstance& inst);

struct QFormulaReport {
  double pq_residual = 0.0;         // ||P Q - 1||
  double k1_residual = 0.0;         // ||rho Q - K_1||
  double rho_q_norm = 0.0;
  int rank_rho_q = 0;
  int rank_wmp = 0;
  int rank_difference = 0;          // rank(Q - Fredholm inverse of P|ker rho)
  int rank_bound = 0;
  bool rank_ok = false;
  bool surjective = true;
};

QFormulaReport verify_q_formula(const AbstractInstance& inst);

/// Chain model identity: (f | (Q - P_-^{-1}) f) = || pi_-^+ rho_- P_-^{-1} f ||^2.
struct ChainPositivity {
  double lhs = 0.0, lhs_imag = 0.0, rhs = 0.0;
};
ChainPositivity chain_positivity(const AbstractInstance& chain, int n, int k, const Vec& f);

}  // namespace lidx
