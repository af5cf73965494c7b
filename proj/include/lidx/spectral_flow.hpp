#pragma once

#include "lidx/spectral_model.hpp"

#include <string>
#include <vector>

namespace lidx {

/// phi(s) = s / (1 - s^2) maps [-1, 1] onto the extended line.
double flow_time(double s);
double flow_coordinate(double t);

struct TrackOptions {
  int grid_points = 129;        // initial uniform grid in the flow coordinate
  double overlap_floor = 0.6;   // below this the neighbor matching is ambiguous
  int max_refine = 24;          // maximal bisection depth per interval
  double weyl_slack = 1e-9;
};

struct EigenvalueTracks {
  std::vector<double> s_grid;                 // flow coordinate, increasing
  std::vector<double> t_grid;                 // phi(s), may contain +-inf
  std::vector<RVec> eigenvalues;              // sorted per grid point
  std::vector<std::vector<int>> perm;         // perm[k][i]: index at k+1 matched to i at k
  std::vector<double> weyl_bound;             // ||H0(t_{k+1}) - H0(t_k)||
  std::vector<std::vector<int>> track_ids;    // track id of each sorted slot
  int refinements = 0;
  double min_overlap = 1.0;
};

EigenvalueTracks build_tracks(const HamiltonianFamily& fam, double s_from = -1.0,
                              double s_to = 1.0, const TrackOptions& opt = {});

struct FlowPartition {
  std::vector<double> breakpoints;    // flow coordinates tau_0 < ... < tau_n
  std::vector<int> break_index;       // grid indices of the breakpoints
  std::vector<double> thresholds;     // a_j for segment [tau_{j-1}, tau_j]
  std::vector<double> gap_margins;
};

struct PartitionOptions {
  double gap_search_cap = 1.0;
  double min_margin = 1e-6;
};

FlowPartition make_flow_partition(const EigenvalueTracks& tracks, const PartitionOptions& opt = {});

struct SpectralFlowResult {
  int sf = 0;
  FlowPartition partition;
  EigenvalueTracks tracks;
  std::vector<int> segment_contributions;
};

SpectralFlowResult spectral_flow(const HamiltonianFamily& fam, double s_from = -1.0,
                                 double s_to = 1.0, const TrackOptions& topt = {},
                                 const PartitionOptions& popt = {});

/// CSV "s,t,eigenvalue,track".
std::string tracks_csv(const EigenvalueTracks& tr);

}  // namespace lidx
