#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <stdexcept>
#include <string>

namespace lsfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input or configuration (bad mesh size, unknown case name, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A mesh / interface pair violates one of the two resolution assumptions:
///   1. the interface crosses each edge of a cut element at most once;
///   2. every cut element touches an interior element of both subdomains.
class AssumptionViolation : public Error {
 public:
  AssumptionViolation(int which, int element, const std::string& what)
      : Error("assumption " + std::to_string(which) + " violated at element " +
              std::to_string(element) + ": " + what +
              " (refine the mesh or move the interface)"),
        assumption_(which),
        element_(element) {}

  int assumption() const { return assumption_; }
  int element() const { return element_; }

 private:
  int assumption_;
  int element_;
};

/// Linear solver failure: non-SPD factorization, breakdown, no convergence.
class SolverError : public Error {
 public:
  using Error::Error;
};

class NotSPD : public SolverError {
 public:
  using SolverError::SolverError;
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

}  // namespace lsfem
