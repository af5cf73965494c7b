#pragma once

#include "lidx/circle_geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

namespace fx {

using namespace lidx;

inline CircleGeometry untwisted_alpha0() {
  CircleGeometry g;
  g.alpha = 0.0;
  g.h = Profile::algebraic(1.0, 4.0, 2.0);
  return g;
}

inline CircleGeometry untwisted_half() {
  CircleGeometry g = untwisted_alpha0();
  g.alpha = 0.5;
  return g;
}

inline CircleGeometry twisted() {
  CircleGeometry g;
  g.alpha = 0.5;
  g.a = Profile::algebraic(0.25, 2.25, 2.0);
  return g;
}

inline CircleGeometry static_half() {
  CircleGeometry g;
  g.alpha = 0.5;
  return g;
}

inline Mat diag(std::initializer_list<double> v) {
  Vec d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

inline Mat random_hermitian(int n, unsigned seed) {
  std::srand(seed);
  const Mat a = Mat::Random(n, n);
  return 0.5 * (a + a.adjoint());
}

}  // namespace fx
