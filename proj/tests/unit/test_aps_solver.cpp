#include "lidx/aps_solver.hpp"

#include "fixtures.hpp"

#include <Eigen/Eigenvalues>

using namespace lidx;

namespace {

DiscreteEvolution make_ev(const HamiltonianFamily& fam, double tmax = 20.0, int n = 161) {
  return DiscreteEvolution(fam, make_time_grid(tmax, n));
}

Vec random_vec(int n, unsigned seed) {
  std::srand(seed);
  return Vec::Random(n);
}

}  // namespace

TEST_CASE("constant family: free solutions have constant asymptotic data") {
  const Mat h = fx::random_hermitian(4, 21);
  const HamiltonianFamily fam = HamiltonianFamily::constant(h);
  const DiscreteEvolution ev = make_ev(fam);
  const Vec v = random_vec(4, 1);
  TimeGridFunction u = zero_function(ev);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  for (int k = 0; k < ev.grid().size(); ++k) {
    const double t = ev.grid().t[k];
    Vec ph(4);
    for (int i = 0; i < 4; ++i) ph(i) = std::exp(cplx(0, t * es.eigenvalues()(i)));
    u.values[k] = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * v;
  }
  const TimeGridFunction f = zero_function(ev);
  CHECK((asymptotic_data(ev, u, f, +1) - v).norm() < 1e-8);
  CHECK((asymptotic_data(ev, u, f, -1) - v).norm() < 1e-8);
  const TimeGridFunction w = solve_from_data(ev, v, f, +1);
  for (int k = 0; k < ev.grid().size(); ++k) CHECK((w.values[k] - u.values[k]).norm() < 1e-8);
}

TEST_CASE("round trips in both directions") {
  for (const CircleGeometry& g : {fx::twisted(), fx::untwisted_alpha0()}) {
    const HamiltonianFamily fam = build_circle_family(g, 6);
    const DiscreteEvolution ev = make_ev(fam);
    const TimeGridFunction f = random_function(ev, 4, 0.0);
    const Vec v = random_vec(fam.dim, 7);
    for (int dir : {+1, -1}) {
      const TimeGridFunction u = solve_from_data(ev, v, f, dir);
      CHECK((asymptotic_data(ev, u, f, dir) - v).norm() < 1e-8 * v.norm());
    }
  }
}

TEST_CASE("negative mode of H- is recovered from the past") {
  const HamiltonianFamily fam = build_circle_family(fx::twisted(), 6);
  const DiscreteEvolution ev = make_ev(fam);
  const EigenSystem em = assemble_snapshot(fam, ev.grid().t.front(), false);
  const Vec v = em.vectors.col(0);
  const TimeGridFunction u = solve_from_data(ev, v, zero_function(ev), -1);
  CHECK((asymptotic_data(ev, u, zero_function(ev), -1) - v).norm() < 1e-10);
}

TEST_CASE("non-solutions are rejected") {
  const HamiltonianFamily fam = build_circle_family(fx::twisted(), 4);
  const DiscreteEvolution ev = make_ev(fam, 10.0, 41);
  TimeGridFunction u = solve_from_data(ev, random_vec(fam.dim, 2), zero_function(ev), +1);
  u.values[10] *= 2.0;
  CHECK_THROWS_AS(asymptotic_data(ev, u, zero_function(ev), +1), NotASolution);
}

TEST_CASE("zero data and zero source give zero") {
  const HamiltonianFamily fam = build_circle_family(fx::twisted(), 4);
  const DiscreteEvolution ev = make_ev(fam, 10.0, 41);
  for (int dir : {+1, -1}) {
    const TimeGridFunction u = solve_from_data(ev, Vec::Zero(fam.dim), zero_function(ev), dir);
    for (const auto& x : u.values) CHECK(x.norm() == 0.0);
    for (const auto& x : retarded_advanced_inverse(ev, zero_function(ev), dir).values) CHECK(x.norm() == 0.0);
  }
}

TEST_CASE("retarded inverse is causal") {
  const HamiltonianFamily fam = HamiltonianFamily::constant(fx::random_hermitian(3, 5));
  const DiscreteEvolution ev = make_ev(fam, 20.0, 201);
  const TimeGridFunction f = random_function(ev, 9, 2.0);
  const TimeGridFunction u = retarded_advanced_inverse(ev, f, +1);
  const TimeGridFunction a = retarded_advanced_inverse(ev, f, -1);
  for (int k = 0; k < ev.grid().size(); ++k) {
    if (ev.grid().t[k] < -2.0) CHECK(u.values[k].norm() == 0.0);
    if (ev.grid().t[k] > 2.0) CHECK(a.values[k].norm() == 0.0);
  }
  // the difference of the two inverses is a free solution
  TimeGridFunction d = u;
  for (int k = 0; k < ev.grid().size(); ++k) d.values[k] -= a.values[k];
  CHECK(evolution_residual(ev, d, zero_function(ev)) < 1e-8);
  // after the source the retarded solution is a free wave
  const Vec late = u.values.back();
  int k0 = 0;
  while (ev.grid().t[k0] < 3.0) ++k0;
  const Mat prop = evolve(fam, ev.grid().t[k0], ev.grid().t.back()).u;
  CHECK((prop * u.values[k0] - late).norm() < 1e-6 * std::max(1.0, late.norm()));
}

TEST_CASE("parametrix form equals the projected data norm") {
  for (const CircleGeometry& g : {fx::twisted(), fx::untwisted_alpha0()}) {
    const HamiltonianFamily fam = build_circle_family(g, 6);
    const DiscreteEvolution ev = make_ev(fam);
    for (unsigned s = 0; s < 10; ++s) {
      const QFormValues q = q_parametrix_form(ev, random_function(ev, 50 + s, 0.0));
      CHECK(q.a >= -1e-10);
      CHECK(q.b >= 0.0);
      CHECK(std::abs(q.a - q.b) <= 1e-6 * std::max(q.b, 1e-30));
      CHECK(std::abs(q.a_imag) <= 1e-6 * std::max(q.b, 1e-30));
    }
    const QFormValues z = q_parametrix_form(ev, zero_function(ev));
    CHECK(z.a == 0.0);
    CHECK(z.b == 0.0);
  }
}

TEST_CASE("source whose past data is purely negative gives a vanishing form") {
  const HamiltonianFamily fam = build_circle_family(fx::twisted(), 5);
  const DiscreteEvolution ev = make_ev(fam, 15.0, 121);
  const int n = fam.dim, k0 = ev.grid().size() / 2;
  // linear map from a point source at k0 to the past data of the advanced solution
  Mat a(n, n);
  for (int i = 0; i < n; ++i) {
    TimeGridFunction f = zero_function(ev);
    f.values[k0](i) = 1.0;
    const TimeGridFunction u = retarded_advanced_inverse(ev, f, -1);
    a.col(i) = ev.exit_phase_minus() * u.values.front();
  }
  const EigenSystem em = assemble_snapshot(fam, ev.grid().t.front(), false);
  TimeGridFunction f = zero_function(ev);
  f.values[k0] = a.partialPivLu().solve(Vec(em.vectors.col(1)));
  const QFormValues q = q_parametrix_form(ev, f);
  CHECK(std::abs(q.a) < 1e-6);
  CHECK(std::abs(q.b) < 1e-6);
}

TEST_CASE("one-sided support defect") {
  SUBCASE("constant family: exact zero") {
    const HamiltonianFamily fam = HamiltonianFamily::constant(fx::diag({-2, -1, 1, 3}));
    const DiscreteEvolution ev = make_ev(fam, 10.0, 41);
    Vec v = Vec::Zero(4);
    v(0) = 1.0;
    v(1) = 0.5;
    const SupportDefect d = one_sided_support_defect(ev, v);
    CHECK(d.sup_r == 0.0);
  }
  SUBCASE("twisted family: lowest mode leaks little") {
    double prev = kInf;
    for (int nm : {16, 32}) {
      const HamiltonianFamily fam = build_circle_family(fx::twisted(), nm);
      const DiscreteEvolution ev = make_ev(fam, 20.0, 161);
      const EigenSystem ep = assemble_snapshot(fam, kInf, false);
      const Vec v = ep.vectors.col(0);
      const SupportDefect d = one_sided_support_defect(ev, v);
      CHECK(d.sup_r <= 0.1 * v.norm());
      CHECK(d.sup_r <= prev + 1e-12);
      prev = d.sup_r;
    }
  }
  SUBCASE("positive data is rejected") {
    const HamiltonianFamily fam = HamiltonianFamily::constant(fx::diag({-1, 1}));
    const DiscreteEvolution ev = make_ev(fam, 5.0, 21);
    CHECK_THROWS_AS(one_sided_support_defect(ev, Vec::Ones(2)), InvalidInstance);
  }
}

TEST_CASE("index triangle") {
  IndexOptions o;
  o.moller.t_cap = 64;
  SUBCASE("constant family") {
    const IndexReport r = aps_index(HamiltonianFamily::constant(fx::diag({-1, 0.5, 2})), std::nullopt, o);
    CHECK(r.index_block == 0);
    CHECK(r.sf == 0);
    CHECK(r.agreement);
  }
  SUBCASE("periodic metric family: -1 three ways") {
    o.moller.tol = 0.5;
    const CircleGeometry g = fx::untwisted_alpha0();
    const IndexReport r = aps_index(build_circle_family(g, 16), g, o);
    CHECK(r.index_block == -1);
    CHECK(r.sf == 0);
    CHECK(r.ker_plus == 1);
    CHECK(r.sf_minus_ker == -1);
    CHECK(r.rhs == doctest::Approx(-1.0));
    CHECK(r.agreement);
  }
  SUBCASE("antiperiodic metric family: 0 three ways") {
    o.moller.tol = 0.5;
    const CircleGeometry g = fx::untwisted_half();
    const IndexReport r = aps_index(build_circle_family(g, 16), g, o);
    CHECK(r.index_block == 0);
    CHECK(r.sf == 0);
    CHECK(std::abs(r.rhs) < 1e-12);
    CHECK(r.agreement);
  }
  SUBCASE("twisted: block index 2 = sf 2, formula comparison suppressed") {
    const CircleGeometry g = fx::twisted();
    const IndexReport r = aps_index(build_circle_family(g, 16), g, o);
    CHECK(r.index_block == 2);
    CHECK(r.index_sf_block == 2);
    CHECK(r.sf == 2);
    CHECK(r.agreement);
    CHECK_FALSE(r.caveats.empty());
    CHECK_FALSE(r.gray_zone);
  }
}
