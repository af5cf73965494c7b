#pragma once

#include "lidx/circle_geometry.hpp"
#include "lidx/propagator.hpp"
#include "lidx/scattering.hpp"
#include "lidx/spectral_flow.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lidx {

/// Nodes uniform in sigma = t/(1+|t|) over [-T, T] with trapezoid weights in t.
struct TimeGrid {
  std::vector<double> t;
  std::vector<double> w;
  int size() const { return static_cast<int>(t.size()); }
  double horizon() const { return t.empty() ? 0.0 : t.back(); }
};

TimeGrid make_time_grid(double t_max, int n_nodes);

struct TimeGridFunction {
  std::vector<Vec> values;
  double weight_epsilon = 0.05;
};

/// Precomputed step maps Phi_k = U(t_{k+1}, t_k) and the data needed for the
/// asymptotic maps and pairings on a grid.
class DiscreteEvolution {
 public:
  DiscreteEvolution(const HamiltonianFamily& fam, TimeGrid grid, const EvolveOptions& opt = {});

  const HamiltonianFamily& family() const { return fam_; }
  const TimeGrid& grid() const { return grid_; }
  int dim() const { return fam_.dim; }
  const Mat& step(int k) const { return phi_[k]; }
  const Mat& step_inv(int k) const { return phi_inv_[k]; }
  const Mat& weight(int k) const { return g_[k]; }
  /// e^{-i t H(t)} at the last / first node
  const Mat& exit_phase_plus() const { return out_plus_; }
  const Mat& exit_phase_minus() const { return out_minus_; }
  const Mat& entry_phase_plus() const { return in_plus_; }
  const Mat& entry_phase_minus() const { return in_minus_; }
  double propagator_error() const { return prop_err_; }

 private:
  HamiltonianFamily fam_;
  TimeGrid grid_;
  std::vector<Mat> phi_, phi_inv_, g_;
  Mat out_plus_, out_minus_, in_plus_, in_minus_;
  double prop_err_ = 0.0;
};

TimeGridFunction zero_function(const DiscreteEvolution& ev);
TimeGridFunction random_function(const DiscreteEvolution& ev, unsigned seed, double support = -1.0);

/// max_k ||u_{k+1} - Phi_k u_k - h_k/2 (Phi_k f_k + f_{k+1})|| / scale.
double evolution_residual(const DiscreteEvolution& ev, const TimeGridFunction& u,
                          const TimeGridFunction& f);

/// rho_+ u = e^{-iTH(T)} u(T), rho_- u = e^{iTH(-T)} u(-T); checks the residual first.
Vec asymptotic_data(const DiscreteEvolution& ev, const TimeGridFunction& u,
                    const TimeGridFunction& f, int direction, double residual_tol = 1e-8);

/// Solution of the discrete Duhamel relation with the given data at +-T.
TimeGridFunction solve_from_data(const DiscreteEvolution& ev, const Vec& v,
                                 const TimeGridFunction& f, int direction);

/// sign +1: retarded (vanishing data at -T); sign -1: advanced.
TimeGridFunction retarded_advanced_inverse(const DiscreteEvolution& ev, const TimeGridFunction& f,
                                           int sign);

/// (f | g) = sum_k w_k (f_k | g_k)_{G(t_k)}
cplx pairing(const DiscreteEvolution& ev, const TimeGridFunction& f, const TimeGridFunction& g);
/// weighted norm with <t>^{-1/2-eps}
double weighted_norm(const DiscreteEvolution& ev, const TimeGridFunction& f);

struct QFormValues {
  double a = 0.0;        // Re (f | (Q - D_-^{-1}) f)
  double a_imag = 0.0;
  double b = 0.0;        // || 1_[0,inf)(H_-) rho_- D_-^{-1} f ||^2
};

QFormValues q_parametrix_form(const DiscreteEvolution& ev, const TimeGridFunction& f);

struct SupportDefectRow {
  double t = 0.0;
  double r = 0.0;
  double weighted = 0.0;
};

struct SupportDefect {
  double epsilon0 = 0.0;
  std::vector<SupportDefectRow> rows;
  double sup_r = 0.0;
  double sup_weighted = 0.0;
};

SupportDefect one_sided_support_defect(const DiscreteEvolution& ev, const Vec& v);

struct IndexOptions {
  MollerOptions moller;
  double rank_tol = 1e-6;
  TrackOptions tracks;
  PartitionOptions partition;
};

struct IndexReport {
  int index_block = 0;       // APS cuts
  int index_sf_block = 0;    // strict-negative cuts both ends
  int sf = 0;
  int ker_plus = 0, ker_minus = 0;
  int sf_minus_ker = 0;
  bool has_rhs = false;
  double eta_plus = 0.0, eta_minus = 0.0;
  double rhs = 0.0;
  bool agreement = false;
  bool agree_block_sf = false;
  bool agree_block_rhs = false;
  bool gray_zone = false;
  std::vector<std::string> caveats;
  BlockIndexResult aps_block, sf_block;
  double cauchy_residual = 0.0;
  double horizon = 0.0;
};

IndexReport aps_index(const HamiltonianFamily& fam, const std::optional<CircleGeometry>& geom,
                      const IndexOptions& opt = {});

}  // namespace lidx
