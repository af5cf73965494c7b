#pragma once

#include "lidx/spectral_model.hpp"

#include <string>
#include <vector>

namespace lidx {

/// magnus4: two-exponential commutator-free Magnus step (order 4)
/// exp_midpoint: exponential midpoint rule (order 2)
/// crank_nicolson: Cayley transform of the midpoint generator (order 2)
enum class Scheme { magnus4, exp_midpoint, crank_nicolson };

Scheme parse_scheme(const std::string& s);
std::string scheme_name(Scheme s);

struct EvolveOptions {
  double tol = 1e-8;
  Scheme scheme = Scheme::magnus4;
  int max_steps = 200000;
  bool adaptive = true;
  int fixed_steps = 64;     // uniform steps in compactified time when !adaptive
  bool with_v = true;
  bool keep_trace = false;
  bool throw_on_failure = true;
};

struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  double est = 0.0;
};

/// U(t_to, t_from): solution operator of du/dt = i H(t) u.
struct Propagator {
  Mat u;
  double t_from = 0.0, t_to = 0.0;
  int steps = 0;
  Scheme scheme = Scheme::magnus4;
  double est_error = 0.0;
  bool converged = true;
  std::vector<StepRecord> trace;
};

/// Compactified time sigma = t / (1 + |t|) and its inverse.
double compactify(double t);
double decompactify(double sigma);

Propagator evolve(const HamiltonianFamily& fam, double s, double t, const EvolveOptions& opt = {});

/// One step map U(t1, t0) with the given scheme (no error control).
Mat step_map(const HamiltonianFamily& fam, double t0, double t1, Scheme scheme, bool with_v = true);

/// e^{i t H(t)} (perturbation excluded).
Mat phase(const HamiltonianFamily& fam, double t);

struct IsometryReport {
  double drift = 0.0;            // max relative change of the L2_t norm over probes
  double drift_per_time = 0.0;
  double gronwall_envelope = 0.0;  // exp(int ||T^-1 dT/dt||) - 1
  bool t_constant = true;
  bool pass = false;
  double tolerance = 0.0;
};

IsometryReport check_l2t_isometry(const HamiltonianFamily& fam, const Propagator& prop,
                                  double isometry_tol = 1e-8, int n_probes = 8,
                                  unsigned seed = 7);

/// ||U(t,s) - U(t,r) U(r,s)|| in operator norm.
double composition_residual(const HamiltonianFamily& fam, double s, double r, double t,
                            const EvolveOptions& opt = {});

std::string trace_csv(const Propagator& p);

}  // namespace lidx
