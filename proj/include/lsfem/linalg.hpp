#pragma once

#include "lsfem/core.hpp"

#include <Eigen/CholmodSupport>

#include <functional>
#include <memory>
#include <mutex>
#include <random>

namespace lsfem {

using LinearOperator = std::function<Vector(const Vector&)>;

/// Sparse Cholesky factorization of an SPD matrix (lower triangle is read).
class Factorization {
 public:
  Factorization() = default;
  explicit Factorization(const SparseMatrix& m) : n_(static_cast<int>(m.rows())) {
    if (m.rows() != m.cols()) throw ConfigError("factorize: matrix is not square");
    if (n_ == 0) return;
    llt_ = std::make_unique<Llt>();
    llt_->compute(m);
    if (llt_->info() != Eigen::Success) {
      throw NotSPD("factorize: matrix of size " + std::to_string(n_) + " is not positive definite");
    }
  }

  int size() const { return n_; }

  Vector solve(const Vector& b) const {
    if (b.size() != n_) throw ConfigError("factorize: right-hand side has the wrong size");
    if (n_ == 0) return Vector();
    std::lock_guard<std::mutex> lock(*mutex_);
    Vector x = llt_->solve(b);
    if (llt_->info() != Eigen::Success) throw SolverError("factorize: back substitution failed");
    return x;
  }

  DenseMatrix solve(const DenseMatrix& b) const {
    DenseMatrix x(b.rows(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j) x.col(j) = solve(Vector(b.col(j)));
    return x;
  }

  LinearOperator as_operator() const {
    return [this](const Vector& b) { return solve(b); };
  }

 private:
  using Llt = Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower>;
  int n_ = 0;
  std::unique_ptr<Llt> llt_;
  std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

inline LinearOperator matrix_operator(const SparseMatrix& m) {
  return [&m](const Vector& x) -> Vector { return m * x; };
}

inline LinearOperator identity_operator() {
  return [](const Vector& x) { return x; };
}

inline LinearOperator jacobi_operator(const SparseMatrix& m) {
  Vector inv = m.diagonal().cwiseInverse();
  return [inv](const Vector& x) -> Vector { return inv.cwiseProduct(x); };
}

struct SolveResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;  // relative, ||b - A x|| / ||b||
};

/// Preconditioned conjugate gradients for an SPD operator.
inline SolveResult pcg_solve(const LinearOperator& op, const LinearOperator& precond, const Vector& b,
                             double tol = 1e-10, int maxit = -1, const Vector* x0 = nullptr) {
  const Eigen::Index n = b.size();
  if (maxit < 0) maxit = static_cast<int>(10 * std::max<Eigen::Index>(n, 1));
  SolveResult res;
  res.x = x0 ? *x0 : Vector::Zero(n);
  const double bn = b.norm();
  if (bn == 0.0) {
    res.x.setZero();
    res.converged = true;
    return res;
  }
  Vector r = b - (x0 ? op(res.x) : Vector::Zero(n));
  res.residual = r.norm() / bn;
  if (res.residual <= tol) {
    res.converged = true;
    return res;
  }
  Vector z = precond(r);
  Vector p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= maxit; ++it) {
    const Vector ap = op(p);
    const double pap = p.dot(ap);
    if (!std::isfinite(pap) || !std::isfinite(rz)) {
      throw SolverError("pcg: breakdown (non-finite value) at iteration " + std::to_string(it));
    }
    if (!(pap > 0.0)) throw SolverError("pcg: operator is not positive definite (p.Ap <= 0)");
    const double alpha = rz / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    res.iterations = it;
    res.residual = r.norm() / bn;
    if (res.residual <= tol) {
      res.converged = true;
      return res;
    }
    z = precond(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return res;
}

struct EigenEstimate {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  int iterations_max = 0;
  int iterations_min = 0;

  double kappa() const { return lambda_max / lambda_min; }
};

namespace detail {

/// Power iteration on op; returns the Rayleigh quotient estimate.
inline double power_iteration(const LinearOperator& op, int n, int iters, double tol, int& used) {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> d(0.5, 1.5);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  v.normalize();
  double lam = 0.0;
  for (used = 1; used <= iters; ++used) {
    Vector w = op(v);
    const double next = v.dot(w);
    const double wn = w.norm();
    if (!std::isfinite(wn) || wn == 0.0) throw SolverError("eigenvalue estimate: breakdown");
    v = w / wn;
    if (used > 1 && std::abs(next - lam) <= tol * std::abs(next)) return next;
    lam = next;
  }
  --used;
  return lam;
}

}  // namespace detail

/// lambda_max by power iteration on op, lambda_min by power iteration on inverse (inverse iteration).
inline EigenEstimate extreme_eigs(const LinearOperator& op, const LinearOperator& inverse, int n, int iters = 2000,
                                  double tol = 1e-6) {
  EigenEstimate e;
  e.lambda_max = detail::power_iteration(op, n, iters, tol, e.iterations_max);
  e.lambda_min = 1.0 / detail::power_iteration(inverse, n, iters, tol, e.iterations_min);
  return e;
}

/// Inverse iteration through PCG solves with the given preconditioner.
inline EigenEstimate extreme_eigs(const LinearOperator& op, const LinearOperator& precond, int n, int iters,
                                  double tol, double inner_tol) {
  auto inverse = [&](const Vector& b) {
    const SolveResult s = pcg_solve(op, precond, b, inner_tol);
    if (!s.converged) throw SolverError("eigenvalue estimate: inner solve did not converge");
    return s.x;
  };
  return extreme_eigs(op, inverse, n, iters, tol);
}

inline EigenEstimate extreme_eigs(const SparseMatrix& m, int iters = 2000, double tol = 1e-6) {
  const Factorization f(m);
  return extreme_eigs(matrix_operator(m), f.as_operator(), static_cast<int>(m.rows()), iters, tol);
}

}  // namespace lsfem
