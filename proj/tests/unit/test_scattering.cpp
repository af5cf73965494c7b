#include "lidx/scattering.hpp"

#include "fixtures.hpp"

using namespace lidx;

TEST_CASE("constant family has trivial wave operators") {
  const HamiltonianFamily fam = HamiltonianFamily::constant(fx::random_hermitian(4, 5));
  MollerOptions o;
  o.full_ladder = true;
  const MollerResult m = moller_limit(fam, +1, o);
  CHECK((m.w - Mat::Identity(4, 4)).norm() < 1e-8);
  for (double r : m.residuals) CHECK(r < 1e-8);
}

TEST_CASE("twisted family: Cook tail gives residual slope near 1 - delta") {
  const HamiltonianFamily fam = build_circle_family(fx::twisted(), 8);
  MollerOptions o;
  o.t_start = 4;
  o.t_cap = 64;
  o.full_ladder = true;
  o.tol = 1.0;
  for (int dir : {+1, -1}) {
    const MollerResult m = moller_limit(fam, dir, o);
    REQUIRE(m.residuals.size() == 4);
    CHECK(m.fit.slope == doctest::Approx(-1.0).epsilon(0.3));
  }
}

TEST_CASE("decaying non-self-adjoint perturbation still has limits") {
  CircleGeometry g = fx::twisted();
  g.v_amp = 0.3;
  const HamiltonianFamily fam = build_circle_family(g, 6);
  MollerOptions o;
  o.t_cap = 128;
  o.tol = 0.1;
  const MollerResult m = moller_limit(fam, +1, o);
  CHECK(m.converged);
  CHECK(m.residual < 0.1);
}

TEST_CASE("unconverged ladder raises with its history") {
  const HamiltonianFamily fam = build_circle_family(fx::twisted(), 8);
  MollerOptions o;
  o.t_start = 2;
  o.t_cap = 4;
  o.tol = 1e-6;
  try {
    moller_limit(fam, +1, o);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residuals.size() == 1);
  }
}

TEST_CASE("scattering operator group law") {
  CircleGeometry g = fx::twisted();
  g.bump = 0.4;
  const HamiltonianFamily fam = build_circle_family(g, 5);
  CHECK(group_law_residual(fam, 3.0, -1.0, 6.0) < 1e-7);
}

TEST_CASE("blocks of the identity with symmetric spectrum") {
  const EigenSystem es = eigensystem_hermitian(fx::diag({-1.5, -0.5, 0.5, 1.5}));
  const ScatteringBlocks b =
      scattering_blocks(Mat::Identity(4, 4), es, es, SpectralCut::negative(), SpectralCut::negative());
  CHECK((b.mm - Mat::Identity(2, 2)).norm() < 1e-14);
  CHECK(b.pm.norm() < 1e-14);
  CHECK(block_index(b.mm).index == 0);
}

TEST_CASE("complementary blocks recompose W0") {
  const Mat w = fx::random_hermitian(6, 2) + cplx(0, 1) * fx::random_hermitian(6, 9);
  const EigenSystem ep = eigensystem_hermitian(fx::random_hermitian(6, 4));
  const EigenSystem em = eigensystem_hermitian(fx::random_hermitian(6, 6));
  const ScatteringBlocks b = scattering_blocks(w, ep, em, SpectralCut::negative(), SpectralCut::nonpositive());
  Mat re = Mat::Zero(6, 6);
  auto put = [&](const Mat& blk, const std::vector<int>& r, const std::vector<int>& c) {
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) re(r[i], c[j]) = blk(i, j);
  };
  put(b.mm, b.rows_minus, b.cols_minus);
  put(b.mp, b.rows_minus, b.cols_plus);
  put(b.pm, b.rows_plus, b.cols_minus);
  put(b.pp, b.rows_plus, b.cols_plus);
  CHECK((ep.vectors * re * em.inverse - w).norm() < 1e-12);
}

TEST_CASE("block index by rank") {
  CHECK(block_index(Mat::Identity(5, 5)).index == 0);
  Mat tall = Mat::Zero(5, 3);
  tall.topRows(3) = Mat::Identity(3, 3);
  const BlockIndexResult r = block_index(tall);
  CHECK(r.index == -2);
  CHECK(r.num_kernel == 0);
  Mat gray = fx::diag({1.0, 2e-6});
  CHECK(block_index(gray, 1e-6).gray_zone);
}

TEST_CASE("index of the scattering block on the circle families") {
  MollerOptions o;
  o.t_cap = 64;
  SUBCASE("twisted, strict cuts both sides: 2 at N = 32 and 64") {
    for (int nm : {16, 32}) {
      const HamiltonianFamily fam = build_circle_family(fx::twisted(), nm);
      const ScatteringData sd = compute_scattering(fam, o);
      const ScatteringBlocks b = scattering_blocks(sd.w0, reference_snapshot(fam, kInf), reference_snapshot(fam, -kInf),
                                                   SpectralCut::negative(), SpectralCut::negative());
      const BlockIndexResult r = block_index(b.mm);
      CHECK(r.index == 2);
      CHECK_FALSE(r.gray_zone);
    }
  }
  SUBCASE("periodic metric family, APS cuts: -1") {
    o.tol = 0.5;
    const HamiltonianFamily fam = build_circle_family(fx::untwisted_alpha0(), 16);
    const ScatteringData sd = compute_scattering(fam, o);
    const ScatteringBlocks b = scattering_blocks(sd.w0, reference_snapshot(fam, kInf), reference_snapshot(fam, -kInf),
                                                 SpectralCut::nonpositive(), SpectralCut::negative());
    CHECK(block_index(b.mm).index == -1);
  }
}

TEST_CASE("compactness profile") {
  MollerOptions o;
  SUBCASE("constant family, disjoint cuts: zero block") {
    const HamiltonianFamily fam = HamiltonianFamily::constant(fx::random_hermitian(6, 12));
    const CompactnessProfile p = compactness_profile(fam, 2.0, -1.0, SpectralCut::negative(),
                                                     SpectralCut::negative().complement(), o);
    CHECK(p.singulars.size() > 0);
    CHECK(p.singulars.maxCoeff() < 1e-8);
  }
  SUBCASE("bumped family: off-diagonal singular values decay") {
    CircleGeometry g = fx::static_half();
    g.bump = 0.8;
    const HamiltonianFamily fam = build_circle_family(g, 16);
    const CompactnessProfile p = compactness_profile(fam, 3.0, -3.0, SpectralCut::negative(),
                                                     SpectralCut::negative().complement(), o);
    REQUIRE(p.column_norms.size() > 4);
    CHECK(p.column_norms(p.column_norms.size() - 1) < 0.1 * p.column_norms(0));
  }
}
