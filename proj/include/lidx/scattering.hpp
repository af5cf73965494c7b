#pragma once

#include "lidx/numerics.hpp"
#include "lidx/propagator.hpp"

#include <map>
#include <vector>

namespace lidx {

struct MollerOptions {
  double t_start = 4.0;         // first horizon of the doubling ladder
  double t_cap = 64.0;          // last admissible horizon
  double tol = 0.1;             // scattering_tol on successive differences
  bool full_ladder = false;     // keep doubling up to t_cap even after convergence
  EvolveOptions evolve;
};

struct MollerResult {
  Mat w;                          // W(0, +-T) at the final horizon
  double horizon = 0.0;
  double residual = 0.0;          // ||W(0,T) - W(0,T/2)||
  std::vector<double> horizons;   // T values with a residual
  std::vector<double> residuals;
  LineFit fit;                    // log residual vs log T (exact residuals skipped)
  bool exact = false;             // every residual below 1e-12
  bool converged = false;
};

/// W(0, +-T) = U(0, +-T) e^{+-i T H(+-T)} over doubling horizons.
MollerResult moller_limit(const HamiltonianFamily& fam, int direction, const MollerOptions& opt = {});

struct ScatteringData {
  Mat w_plus, w_minus;  // W(0, +-inf)
  Mat w;                // W(+inf, -inf) = W(0,+inf)^-1 W(0,-inf)
  Mat w0;               // T_+^-1 W T_-
  double horizon = 0.0;
  double cauchy_residual = 0.0;
  MollerResult plus, minus;
};

ScatteringData compute_scattering(const HamiltonianFamily& fam, const MollerOptions& opt = {});

/// W(t,s) = e^{-itH(t)} U(t,s) e^{isH(s)} for finite t, s.
Mat scattering_operator(const HamiltonianFamily& fam, double t, double s, const EvolveOptions& opt = {});

/// ||W(t,s) W(s,r) - W(t,r)||.
double group_law_residual(const HamiltonianFamily& fam, double t, double s, double r,
                          const EvolveOptions& opt = {});

/// W^{ab}: a is the codomain part (rows, at +inf), b the domain part (columns, at -inf).
struct ScatteringBlocks {
  Mat m;                            // full W0 in eigenbases (rows: H0+, cols: H0-)
  Mat pp, pm, mp, mm;               // W^{++}, W^{+-}, W^{-+}, W^{--}
  std::vector<int> rows_minus, rows_plus, cols_minus, cols_plus;
};

/// cut_out selects the "-" part at +inf, cut_in the "-" part at -inf.
ScatteringBlocks scattering_blocks(const Mat& w0, const EigenSystem& es_plus,
                                   const EigenSystem& es_minus, const SpectralCut& cut_out,
                                   const SpectralCut& cut_in);

struct BlockIndexResult {
  int dim_dom = 0, dim_codom = 0;
  RVec singulars;
  int rank = 0;
  int num_kernel = 0, num_cokernel = 0;
  int index = 0;
  bool gray_zone = false;
  std::vector<double> gray_values;
  std::map<int, int> stability;  // N -> index
};

/// block maps dim_dom (columns) to dim_codom (rows).
BlockIndexResult block_index(const Mat& block, double rank_tol = 1e-6);

struct CompactnessProfile {
  RVec singulars;              // descending
  RVec column_norms;           // per domain mode, ordered by |lambda| ascending
  RVec column_freqs;           // the |lambda| of those modes
  double decay_exponent = 0.0; // fit of log column norm vs log <lambda>
  bool tail_monotone = false;
  double proxy_p1 = 0.0, proxy_p2 = 0.0;  // max_k sigma-weighted by <lambda>^p
};

/// 1_I(H(t)) W(t,s) 1_J(H(s)); t, s may be +-inf (horizon of opt used there).
CompactnessProfile compactness_profile(const HamiltonianFamily& fam, double t, double s,
                                       const SpectralCut& cut_i, const SpectralCut& cut_j,
                                       const MollerOptions& opt = {});

}  // namespace lidx
