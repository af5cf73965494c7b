#include "lidx/propagator.hpp"

#include "fixtures.hpp"

#include <Eigen/Eigenvalues>

using namespace lidx;

namespace {

Mat exp_oracle(const Mat& h, double t) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Vec d(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::exp(cplx(0.0, t * es.eigenvalues()(i)));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

TEST_CASE("constant family evolves by exp(i(t-s)H)") {
  const Mat h = fx::random_hermitian(6, 3);
  const HamiltonianFamily fam = HamiltonianFamily::constant(h);
  for (auto sch : {Scheme::magnus4, Scheme::exp_midpoint}) {
    EvolveOptions o;
    o.scheme = sch;
    const Propagator p = evolve(fam, 0.0, 1.0, o);
    CHECK((p.u - exp_oracle(h, 1.0)).norm() < 1e-8);
  }
}

TEST_CASE("zero-length evolution is the identity") {
  const HamiltonianFamily fam = build_circle_family(fx::twisted(), 4);
  const Propagator p = evolve(fam, 2.5, 2.5);
  CHECK(p.u == Mat::Identity(fam.dim, fam.dim));
}

TEST_CASE("half-integer lattice picks up -1 over a full period") {
  const HamiltonianFamily fam = build_circle_family(fx::static_half(), 6);
  const Propagator p = evolve(fam, 0.0, 2.0 * std::numbers::pi);
  CHECK((p.u + Mat::Identity(fam.dim, fam.dim)).norm() < 1e-9);
}

TEST_CASE("non-commuting family: magnus4 and midpoint agree, order visible") {
  CircleGeometry g = fx::twisted();
  g.bump = 0.5;
  const HamiltonianFamily fam = build_circle_family(g, 5);
  EvolveOptions tight;
  tight.tol = 1e-12;
  const Mat ref = evolve(fam, -2.0, 3.0, tight).u;
  EvolveOptions fixed;
  fixed.adaptive = false;
  double prev = 0.0;
  for (int n : {40, 80}) {
    fixed.fixed_steps = n;
    const double err = (evolve(fam, -2.0, 3.0, fixed).u - ref).norm();
    if (prev > 0) CHECK(prev / err > 10.0);  // fourth order: ratio near 16
    prev = err;
  }
  fixed.scheme = Scheme::exp_midpoint;
  fixed.fixed_steps = 400;
  CHECK((evolve(fam, -2.0, 3.0, fixed).u - ref).norm() < 1e-3);
}

TEST_CASE("phase operator") {
  CHECK((phase(HamiltonianFamily::constant(fx::diag({1, 2})), 0.0) - Mat::Identity(2, 2)).norm() < 1e-15);
  const Mat p1 = phase(HamiltonianFamily::constant(fx::diag({1})), std::numbers::pi);
  CHECK(std::abs(p1(0, 0) + 1.0) < 1e-14);
  const Mat p2 = phase(HamiltonianFamily::constant(fx::diag({2, -2})), std::numbers::pi / 2);
  CHECK((p2 + Mat::Identity(2, 2)).norm() < 1e-14);
  CHECK_THROWS(phase(HamiltonianFamily::constant(fx::diag({1})), kInf));
}

TEST_CASE("L2_t isometry") {
  SUBCASE("constant family") {
    const HamiltonianFamily fam = HamiltonianFamily::constant(fx::random_hermitian(5, 8));
    EvolveOptions o;
    o.tol = 1e-12;
    const IsometryReport r = check_l2t_isometry(fam, evolve(fam, -3.0, 4.0, o), 1e-10);
    CHECK(r.drift_per_time <= 1e-10);
    CHECK(r.pass);
  }
  SUBCASE("circle family with T = I") {
    CircleGeometry g = fx::twisted();
    g.bump = 0.3;
    const HamiltonianFamily fam = build_circle_family(g, 6);
    const IsometryReport r = check_l2t_isometry(fam, evolve(fam, -5.0, 5.0));
    CHECK(r.drift <= 1e-8);
  }
  SUBCASE("moving similarity stays inside the Gronwall envelope") {
    CircleGeometry g = fx::static_half();
    g.lapse_modes = {0.3};
    g.lapse_scale = Profile::algebraic(0.0, 0.8, 2.0);
    const HamiltonianFamily fam = build_circle_family(g, 6);
    const IsometryReport r = check_l2t_isometry(fam, evolve(fam, -4.0, 4.0));
    CHECK(r.gronwall_envelope > 0.0);
    CHECK(r.drift <= r.tolerance);
    CHECK(r.pass);
  }
}

TEST_CASE("composition residual within ten step tolerances") {
  CircleGeometry g = fx::twisted();
  g.bump = 0.4;
  const HamiltonianFamily fam = build_circle_family(g, 6);
  EvolveOptions o;
  o.tol = 1e-8;
  CHECK(composition_residual(fam, -3.0, 0.5, 4.0, o) <= 1e-7);
}

TEST_CASE("compactification round trip") {
  for (double t : {-30.0, -1.0, 0.0, 0.2, 1e3}) CHECK(decompactify(compactify(t)) == doctest::Approx(t).epsilon(1e-12));
  CHECK(parse_scheme("midpoint") == Scheme::exp_midpoint);
  CHECK_THROWS_AS(parse_scheme("rk4"), ConfigError);
}
