#include "lidx/spectral_flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lidx {

double flow_time(double s) {
  if (s >= 1.0) return kInf;
  if (s <= -1.0) return -kInf;
  return s / (1.0 - s * s);
}

double flow_coordinate(double t) {
  if (t == kInf) return 1.0;
  if (t == -kInf) return -1.0;
  if (t == 0.0) return 0.0;
  // inverse of s/(1-s^2) = t on (-1,1)
  return (-1.0 + std::sqrt(1.0 + 4.0 * t * t)) / (2.0 * t);
}

namespace {

struct Match {
  std::vector<int> perm;
  double worst = 1.0;
  bool weyl_ok = true;
  double weyl = 0.0;
};

std::vector<int> clusters(const RVec& ev, double tol) {
  std::vector<int> c(ev.size());
  int id = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (i > 0 && ev(i) - ev(i - 1) > tol) ++id;
    c[i] = id;
  }
  return c;
}

Match match(const EigenSystem& a, const EigenSystem& b, const Mat& ha, const Mat& hb,
            double slack) {
  const int n = a.size();
  const RMat ov = (a.vectors.adjoint() * b.vectors).cwiseAbs2();
  Match m;
  m.perm.assign(n, -1);
  std::vector<std::pair<double, std::pair<int, int>>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (ov(i, j) > 1e-6) pairs.push_back({ov(i, j), {i, j}});
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<char> used_b(n, 0);
  for (const auto& p : pairs) {
    const int i = p.second.first, j = p.second.second;
    if (m.perm[i] >= 0 || used_b[j]) continue;
    m.perm[i] = j;
    used_b[j] = 1;
  }
  // leftovers (tiny overlaps): pair in order
  int jn = 0;
  for (int i = 0; i < n; ++i) {
    if (m.perm[i] >= 0) continue;
    while (used_b[jn]) ++jn;
    m.perm[i] = jn;
    used_b[jn] = 1;
  }
  // subspace overlap within degenerate clusters
  const double ctol = 1e-8 * std::max(1.0, std::max(a.scale, b.scale));
  const auto cb = clusters(b.eigenvalues, ctol);
  m.weyl = op_norm(hb - ha);
  for (int i = 0; i < n; ++i) {
    double o = 0.0;
    for (int j = 0; j < n; ++j)
      if (cb[j] == cb[m.perm[i]]) o += ov(i, j);
    m.worst = std::min(m.worst, o);
    const double jump = std::abs(b.eigenvalues(m.perm[i]) - a.eigenvalues(i));
    if (jump > m.weyl + slack * std::max(1.0, a.scale)) m.weyl_ok = false;
  }
  return m;
}

}  // namespace

EigenvalueTracks build_tracks(const HamiltonianFamily& fam, double s_from, double s_to,
                              const TrackOptions& opt) {
  if (!(s_from < s_to) || s_from < -1.0 || s_to > 1.0)
    throw Error("build_tracks: need -1 <= s_from < s_to <= 1");
  if (opt.grid_points < 2) throw Error("build_tracks: need at least two grid points");
  std::vector<double> s;
  for (int k = 0; k < opt.grid_points; ++k)
    s.push_back(s_from + (s_to - s_from) * k / (opt.grid_points - 1));
  std::vector<Mat> h;
  std::vector<EigenSystem> es;
  for (double x : s) {
    h.push_back(fam.h0(flow_time(x)));
    es.push_back(eigensystem_hermitian(h.back()));
  }
  const double min_width = (s_to - s_from) / (opt.grid_points - 1) / std::ldexp(1.0, opt.max_refine);

  EigenvalueTracks tr;
  std::size_t k = 0;
  std::vector<Match> matches;
  while (k + 1 < s.size()) {
    Match m = match(es[k], es[k + 1], h[k], h[k + 1], opt.weyl_slack);
    const bool bad = m.worst < opt.overlap_floor || !m.weyl_ok;
    if (bad) {
      const double mid = 0.5 * (s[k] + s[k + 1]);
      if (s[k + 1] - s[k] > min_width) {
        s.insert(s.begin() + k + 1, mid);
        h.insert(h.begin() + k + 1, fam.h0(flow_time(mid)));
        es.insert(es.begin() + k + 1, eigensystem_hermitian(h[k + 1]));
        ++tr.refinements;
        continue;
      }
      std::ostringstream os;
      os << "build_tracks: matching ambiguous on t in [" << flow_time(s[k]) << ", "
         << flow_time(s[k + 1]) << "] (overlap " << m.worst << ")";
      throw Error(os.str());
    }
    tr.min_overlap = std::min(tr.min_overlap, m.worst);
    matches.push_back(std::move(m));
    ++k;
  }
  tr.s_grid = s;
  for (double x : s) tr.t_grid.push_back(flow_time(x));
  for (const auto& e : es) tr.eigenvalues.push_back(e.eigenvalues);
  const int n = fam.dim;
  tr.track_ids.assign(s.size(), std::vector<int>(n));
  for (int i = 0; i < n; ++i) tr.track_ids[0][i] = i;
  for (std::size_t j = 0; j < matches.size(); ++j) {
    tr.perm.push_back(matches[j].perm);
    tr.weyl_bound.push_back(matches[j].weyl);
    for (int i = 0; i < n; ++i) tr.track_ids[j + 1][matches[j].perm[i]] = tr.track_ids[j][i];
  }
  return tr;
}

namespace {

using Interval = std::pair<double, double>;

// remove the closed interval [lo, hi] from a set of open intervals
void subtract(std::vector<Interval>& free, double lo, double hi) {
  std::vector<Interval> out;
  for (const auto& f : free) {
    if (hi <= f.first || lo >= f.second) {
      out.push_back(f);
      continue;
    }
    if (lo > f.first) out.push_back({f.first, lo});
    if (hi < f.second) out.push_back({hi, f.second});
  }
  free.swap(out);
}

void subtract_interval(std::vector<Interval>& free, const EigenvalueTracks& tr, std::size_t k) {
  const RVec& a = tr.eigenvalues[k];
  const RVec& b = tr.eigenvalues[k + 1];
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    // sorted eigenvalues are Weyl-continuous; pad by the unresolved part of the bound
    const double pad = 0.5 * std::max(0.0, tr.weyl_bound[k] - std::abs(b(j) - a(j)));
    subtract(free, std::min(a(j), b(j)) - pad, std::max(a(j), b(j)) + pad);
  }
}

bool widest(const std::vector<Interval>& free, double min_margin, Interval& best) {
  double w = 0.0;
  for (const auto& f : free) {
    if (f.second - f.first > w) {
      w = f.second - f.first;
      best = f;
    }
  }
  return w > 2.0 * min_margin;
}

}  // namespace

FlowPartition make_flow_partition(const EigenvalueTracks& tr, const PartitionOptions& opt) {
  if (!(opt.gap_search_cap > 0.0)) throw Error("make_flow_partition: gap_search_cap must be positive");
  FlowPartition p;
  const std::size_t npts = tr.s_grid.size();
  std::size_t start = 0;
  p.breakpoints.push_back(tr.s_grid[0]);
  p.break_index.push_back(0);
  while (start + 1 < npts) {
    std::vector<Interval> free = {{0.0, opt.gap_search_cap}};
    Interval best{0, 0};
    std::size_t k = start;
    Interval last_best{0, 0};
    while (k + 1 < npts) {
      std::vector<Interval> trial = free;
      subtract_interval(trial, tr, k);
      if (!widest(trial, opt.min_margin, best)) break;
      free.swap(trial);
      last_best = best;
      ++k;
    }
    if (k == start) {
      std::ostringstream os;
      os << "make_flow_partition: no positive gap on t in [" << tr.t_grid[start] << ", "
         << tr.t_grid[start + 1] << "]; refine the grid or raise gap_search_cap";
      throw Error(os.str());
    }
    p.breakpoints.push_back(tr.s_grid[k]);
    p.break_index.push_back(static_cast<int>(k));
    p.thresholds.push_back(0.5 * (last_best.first + last_best.second));
    p.gap_margins.push_back(0.5 * (last_best.second - last_best.first));
    start = k;
  }
  return p;
}

namespace {

int count_0a(const RVec& ev, double a) {
  EigenSystem es;
  es.eigenvalues = ev;
  es.scale = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
  const int nonneg = cut_rank(es, SpectralCut::nonnegative());
  const int above = cut_rank(es, SpectralCut{a, Side::above, true, true});
  return nonneg - above;
}

}  // namespace

SpectralFlowResult spectral_flow(const HamiltonianFamily& fam, double s_from, double s_to,
                                 const TrackOptions& topt, const PartitionOptions& popt) {
  SpectralFlowResult r;
  r.tracks = build_tracks(fam, s_from, s_to, topt);
  r.partition = make_flow_partition(r.tracks, popt);
  for (std::size_t j = 0; j < r.partition.thresholds.size(); ++j) {
    const double a = r.partition.thresholds[j];
    const int k0 = r.partition.break_index[j], k1 = r.partition.break_index[j + 1];
    const int c = count_0a(r.tracks.eigenvalues[k1], a) - count_0a(r.tracks.eigenvalues[k0], a);
    r.segment_contributions.push_back(c);
    r.sf += c;
  }
  return r;
}

std::string tracks_csv(const EigenvalueTracks& tr) {
  std::ostringstream os;
  os.precision(17);
  os << "s,t,eigenvalue,track\n";
  for (std::size_t k = 0; k < tr.s_grid.size(); ++k)
    for (Eigen::Index i = 0; i < tr.eigenvalues[k].size(); ++i)
      os << tr.s_grid[k] << ',' << tr.t_grid[k] << ',' << tr.eigenvalues[k](i) << ','
         << tr.track_ids[k][i] << '\n';
  return os.str();
}

}  // namespace lidx
