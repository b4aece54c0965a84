#pragma once

#include <cstddef>
#include <string_view>

#include <Eigen/SparseCore>

#include "sqb/bound.hpp"
#include "sqb/model.hpp"

namespace sqb {

/// The regularized curvature Sigma + eta I with Sigma = L D L' held in factored
/// form. apply() costs O(nnz(L) + d) and never forms the d x d matrix.
class CurvatureOperator {
 public:
  CurvatureOperator(const BoundFactors& factors, double eta);

  std::size_t dim() const { return dim_; }
  std::size_t rank() const { return static_cast<std::size_t>(weights_.size()); }
  double eta() const { return eta_; }

  Vector apply(const Vector& x) const;
  void apply(const Vector& x, Vector& out) const;

 private:
  std::size_t dim_;
  double eta_;
  Eigen::SparseMatrix<double> columns_;  // d x k
  Vector weights_;
};

struct SolveReport {
  Vector solution;
  std::size_t iterations_run = 0;
  double final_residual_norm = 0.0;
};

enum class SolverMethod {
  /// Minimizes the residual |b - op x| over the Krylov space of op^2. Directions
  /// with small curvature enter late, so a truncated solve stays small there.
  kLsqr,
  /// Minimizes the op-norm error; small-curvature directions dominate early.
  kConjugateGradient,
};

std::string_view solver_name(SolverMethod method);
SolverMethod parse_solver(std::string_view name);

/// Truncated iterative solve of op * x = b starting from x = 0. Runs
/// min(max_iters, dim) iterations unless the residual drops below 1e-14 |b|
/// or the method breaks down.
SolveReport solve(const CurvatureOperator& op, const Vector& b, std::size_t max_iters,
                  SolverMethod method = SolverMethod::kConjugateGradient);

}  // namespace sqb
