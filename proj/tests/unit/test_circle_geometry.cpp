#include "lidx/circle_geometry.hpp"

#include "fixtures.hpp"

#include <Eigen/Eigenvalues>

using namespace lidx;

namespace {

std::vector<double> eigs(const HamiltonianFamily& fam, double t) {
  Eigen::SelfAdjointEigenSolver<Mat> es(fam.h0(t));
  const RVec& e = es.eigenvalues();
  return {e.data(), e.data() + e.size()};
}

}  // namespace

TEST_CASE("static antiperiodic family is constant with half-integer spectrum") {
  const HamiltonianFamily fam = build_circle_family(fx::static_half(), 5);
  CHECK((fam.h(-3.0) - fam.h(4.0)).norm() < 1e-14);
  const auto e = eigs(fam, 0.0);
  REQUIRE(e.size() == 10);
  for (std::size_t i = 0; i < e.size(); ++i) CHECK(e[i] == doctest::Approx(-4.5 + static_cast<double>(i)));
}

TEST_CASE("periodic metric family has spectrum n / sqrt(h(t)) and a persistent zero mode") {
  const CircleGeometry g = fx::untwisted_alpha0();
  const HamiltonianFamily fam = build_circle_family(g, 6);
  for (double t : {-10.0, -1.0, 0.0, 0.5, 7.0}) {
    const double h = g.h(t);
    const auto e = eigs(fam, t);
    REQUIRE(e.size() == 13);
    for (int n = -6; n <= 6; ++n) CHECK(e[n + 6] == doctest::Approx(n / std::sqrt(h)).epsilon(1e-12));
    CHECK(std::abs(e[6]) < 1e-14);
  }
}

TEST_CASE("twisted family follows n + 1/2 + a(t)") {
  const CircleGeometry g = fx::twisted();
  const HamiltonianFamily fam = build_circle_family(g, 4);
  for (double t : {-20.0, 0.0, 3.0}) {
    const auto e = eigs(fam, t);
    const auto cf = closed_form_spectrum(g, t, 4);
    REQUIRE(e.size() == cf.size());
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(e[i] == doctest::Approx(cf[i]).epsilon(1e-12));
    CHECK(e.front() == doctest::Approx(-3.5 + g.a(t)).epsilon(1e-12));
  }
}

TEST_CASE("closed-form spectrum formula") {
  CircleGeometry g;
  g.alpha = 0.0;
  g.h = Profile::constant(4.0);
  auto s = closed_form_spectrum(g, 1.0, 3);
  std::vector<double> want{-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5};
  REQUIRE(s.size() == want.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == doctest::Approx(want[i]));

  g = CircleGeometry{};
  s = closed_form_spectrum(g, 0.0, 2);
  want = {-1.5, -0.5, 0.5, 1.5};
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == doctest::Approx(want[i]));

  g.alpha = 0.0;
  g.a = Profile::constant(1.0);
  for (double x : closed_form_spectrum(g, 0.0, 3)) CHECK(x == doctest::Approx(std::round(x)));
}

TEST_CASE("position-dependent lapse stays positive and keeps the inertia") {
  CircleGeometry g = fx::static_half();
  g.lapse_modes = {0.3, 0.1};
  g.lapse_scale = Profile::algebraic(0.0, 1.0, 2.0);
  const HamiltonianFamily fam = build_circle_family(g, 8);
  CHECK_FALSE(fam.t_constant);
  const EigenSystem es = assemble_snapshot(fam, 5.0);
  CHECK((es.reconstruct() - fam.h(5.0, false)).norm() < 1e-10);
  int neg = 0;
  for (int i = 0; i < es.size(); ++i) neg += es.eigenvalues(i) < 0;
  CHECK(neg == 8);
  g.lapse_modes = {0.7, 0.4};
  CHECK_THROWS_AS(g.validate(), InvalidInstance);
}

TEST_CASE("Hurwitz zeta against known values") {
  const double pi = std::numbers::pi;
  CHECK(hurwitz_zeta(2.0, 1.0) == doctest::Approx(pi * pi / 6).epsilon(1e-13));
  CHECK(hurwitz_zeta(4.0, 0.5) == doctest::Approx(std::pow(pi, 4) / 6).epsilon(1e-12));
  for (double a : {0.1, 0.3, 0.75}) CHECK(hurwitz_zeta(0.0, a) == doctest::Approx(0.5 - a).epsilon(1e-12));
  // direct sum oracle at s = 3
  double direct = 0.0;
  for (int n = 0; n < 200000; ++n) direct += std::pow(n + 0.3, -3.0);
  CHECK(hurwitz_zeta(3.0, 0.3) == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("eta invariant of the shifted lattice") {
  for (auto m : {EtaMethod::hurwitz, EtaMethod::partial_sum_zeta}) {
    CHECK(std::abs(eta_invariant(0.5, m).value) < 1e-12);
    CHECK(eta_invariant(0.25, m).value == doctest::Approx(0.5).epsilon(1e-9));
    const EtaResult z = eta_invariant(0.0, m);
    CHECK(std::abs(z.value) < 1e-12);
    CHECK(z.kernel_dim == 1);
  }
  for (double b : {0.1, 0.25, 0.5, 0.9}) {
    const double h = eta_invariant(b, EtaMethod::hurwitz).value;
    const EtaResult p = eta_invariant(b, EtaMethod::partial_sum_zeta);
    CHECK(std::abs(h - p.value) < 1e-6);
    CHECK(h == doctest::Approx(1.0 - 2.0 * b).epsilon(1e-10));
    CHECK_FALSE(p.flagged);
  }
}

TEST_CASE("lattice reflection antisymmetry") {
  for (auto m : {EtaMethod::hurwitz, EtaMethod::partial_sum_zeta})
    for (double b : {0.1, 0.37, 0.8}) CHECK(std::abs(eta_invariant(b, m).value + eta_invariant(1.0 - b, m).value) < 1e-9);
}

TEST_CASE("APS right-hand side on the circle") {
  CHECK(aps_rhs_circle(fx::untwisted_alpha0()).rhs_value == doctest::Approx(-1.0));
  CircleGeometry g = fx::untwisted_alpha0();
  g.h = Profile::algebraic(2.0, 9.0, 2.0);
  CHECK(aps_rhs_circle(g).rhs_value == doctest::Approx(-1.0));
  CHECK(std::abs(aps_rhs_circle(fx::untwisted_half()).rhs_value) < 1e-12);
  const ApsRhs tw = aps_rhs_circle(fx::twisted());
  CHECK(std::abs(tw.rhs_value) < 1e-9);
  CHECK_FALSE(tw.caveats.empty());
}

TEST_CASE("crossing-count oracle") {
  CHECK(crossing_count_oracle(fx::twisted(), 16) == 2);
  CHECK(crossing_count_oracle(fx::twisted(), 32) == 2);
  CHECK(crossing_count_oracle(fx::untwisted_alpha0(), 16) == 0);
  CircleGeometry down = fx::twisted();
  std::swap(down.a.minus, down.a.plus);
  CHECK(crossing_count_oracle(down, 16) == -2);
}

TEST_CASE("geometry validation") {
  CircleGeometry g = fx::twisted();
  g.delta = 1.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = fx::twisted();
  g.alpha = 0.3;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  CHECK_THROWS(build_circle_family(fx::twisted(), 2));
}
