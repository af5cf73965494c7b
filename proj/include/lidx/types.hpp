#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lidx {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Japanese bracket <t> = sqrt(1 + t^2).
inline double bracket(double t) { return std::sqrt(1.0 + t * t); }

/// Largest singular value.
double op_norm(const Mat& m);

/// Smallest singular value (0 for empty or rank-deficient shapes).
double min_singular(const Mat& m);

/// Operator-norm condition number of a square matrix.
double condition_number(const Mat& m);

Mat identity(int n);

/// Rows/columns selected by index lists, in the listed order.
Mat submatrix(const Mat& m, const std::vector<int>& rows, const std::vector<int>& cols);

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure carries a human-readable message; the
// subclasses add the quantity a caller needs to react.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invariant_violation"; }
};

class EigenSolverFailure : public Error {
 public:
  EigenSolverFailure(const std::string& what, double condition)
      : Error(what), condition(condition) {}
  const char* kind() const noexcept override { return "eigensolver_failure"; }
  double condition;
};

class GapTooSmall : public Error {
 public:
  GapTooSmall(const std::string& what, double eigenvalue, double threshold)
      : Error(what), eigenvalue(eigenvalue), threshold(threshold) {}
  const char* kind() const noexcept override { return "gap_too_small"; }
  double eigenvalue;
  double threshold;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> residuals)
      : Error(what), residuals(std::move(residuals)) {}
  const char* kind() const noexcept override { return "convergence_error"; }
  std::vector<double> residuals;
};

class NotASolution : public Error {
 public:
  NotASolution(const std::string& what, double residual) : Error(what), residual(residual) {}
  const char* kind() const noexcept override { return "not_a_solution"; }
  double residual;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config_error"; }
};

class InvalidInstance : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_instance"; }
};

}  // namespace lidx
