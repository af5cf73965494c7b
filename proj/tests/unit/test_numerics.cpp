#include "lidx/numerics.hpp"

#include "fixtures.hpp"

#include <vector>

using namespace lidx;

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 exactly") {
  const GaussRule g = gauss_legendre(6);
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    s += g.weights[i] * std::pow(g.nodes[i], 10);
    w += g.weights[i];
  }
  CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s == doctest::Approx(2.0 / 11.0).epsilon(1e-13));
}

TEST_CASE("log-log fit recovers a power law") {
  std::vector<double> x{2, 4, 8, 16, 32}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -1.5));
  const LineFit f = fit_loglog(x, y);
  CHECK(f.slope == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(f.samples == 5);
}

TEST_CASE("operator norm and smallest singular value") {
  const Mat d = fx::diag({3.0, -0.5, 2.0});
  CHECK(op_norm(d) == doctest::Approx(3.0));
  CHECK(min_singular(d) == doctest::Approx(0.5));
  CHECK(condition_number(d) == doctest::Approx(6.0));
  CHECK(op_norm(Mat(0, 0)) == 0.0);
}
