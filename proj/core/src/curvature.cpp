#include "sqb/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sqb/errors.hpp"

namespace sqb {

CurvatureOperator::CurvatureOperator(const BoundFactors& factors, double eta)
    : dim_(factors.dim), eta_(eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw InputError("curvature ridge eta must be >= 0");
  if (factors.columns.size() != factors.weights.size()) {
    throw InputError("factor columns and weights differ in count");
  }
  const auto d = static_cast<Eigen::Index>(dim_);
  const auto k = static_cast<Eigen::Index>(factors.columns.size());

  std::size_t nnz = 0;
  for (const auto& c : factors.columns) {
    if (c.size() != d) throw InputError("factor column dimension mismatch");
    nnz += static_cast<std::size_t>(c.nonZeros());
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(nnz);
  weights_.resize(k);
  for (Eigen::Index col = 0; col < k; ++col) {
    const auto& c = factors.columns[static_cast<std::size_t>(col)];
    for (SparseVector::InnerIterator it(c); it; ++it) triplets.emplace_back(it.index(), col, it.value());
    const double w = factors.weights[static_cast<std::size_t>(col)];
    if (!(w >= 0.0)) throw InputError("factor weights must be >= 0");
    weights_[col] = w;
  }
  columns_.resize(d, k);
  columns_.setFromTriplets(triplets.begin(), triplets.end());
  columns_.makeCompressed();
}

void CurvatureOperator::apply(const Vector& x, Vector& out) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    throw InputError("apply: vector has dimension " + std::to_string(x.size()) + ", operator has " +
                     std::to_string(dim_));
  }
  const Vector projected = weights_.cwiseProduct(columns_.transpose() * x);
  out.noalias() = columns_ * projected;
  out += eta_ * x;
}

Vector CurvatureOperator::apply(const Vector& x) const {
  Vector out(x.size());
  apply(x, out);
  return out;
}

std::string_view solver_name(SolverMethod method) {
  return method == SolverMethod::kLsqr ? "lsqr" : "cg";
}

SolverMethod parse_solver(std::string_view name) {
  if (name == "lsqr") return SolverMethod::kLsqr;
  if (name == "cg") return SolverMethod::kConjugateGradient;
  throw InputError("unknown solver '" + std::string(name) + "'");
}

namespace {

void conjugate_gradient(const CurvatureOperator& op, const Vector& b, std::size_t cap,
                        double stop, SolveReport& report) {
  Vector residual = b;
  Vector direction = residual;
  Vector image(b.size());
  double rr = residual.squaredNorm();
  while (report.iterations_run < cap) {
    op.apply(direction, image);
    const double curvature = direction.dot(image);
    if (!(curvature > 0.0)) break;
    const double step = rr / curvature;
    report.solution += step * direction;
    residual -= step * image;
    ++report.iterations_run;
    const double rr_next = residual.squaredNorm();
    if (std::sqrt(rr_next) < stop) break;
    direction = residual + (rr_next / rr) * direction;
    rr = rr_next;
  }
}

// Paige-Saunders bidiagonalization; op is symmetric so op' = op.
void lsqr(const CurvatureOperator& op, const Vector& b, std::size_t cap, double stop,
          SolveReport& report) {
  double beta = b.norm();
  Vector u = b / beta;
  Vector v = op.apply(u);
  double alpha = v.norm();
  if (alpha == 0.0) return;  // b is orthogonal to the range
  v /= alpha;
  Vector w = v;
  Vector scratch(b.size());
  double phi_bar = beta;
  double rho_bar = alpha;
  while (report.iterations_run < cap) {
    op.apply(v, scratch);
    u = scratch - alpha * u;
    beta = u.norm();
    if (beta > 0.0) {
      u /= beta;
      op.apply(u, scratch);
      v = scratch - beta * v;
      alpha = v.norm();
      if (alpha > 0.0) v /= alpha;
    } else {
      alpha = 0.0;
    }
    const double rho = std::hypot(rho_bar, beta);
    const double c = rho_bar / rho;
    const double s = beta / rho;
    const double theta = s * alpha;
    rho_bar = -c * alpha;
    const double phi = c * phi_bar;
    phi_bar = s * phi_bar;
    report.solution += (phi / rho) * w;
    w = v - (theta / rho) * w;
    ++report.iterations_run;
    if (std::abs(phi_bar) < stop || beta == 0.0 || alpha == 0.0) break;
  }
}

}  // namespace

SolveReport solve(const CurvatureOperator& op, const Vector& b, std::size_t max_iters,
                  SolverMethod method) {
  if (max_iters < 1) throw InputError("solve: iteration cap must be >= 1");
  if (static_cast<std::size_t>(b.size()) != op.dim()) throw InputError("solve: dimension mismatch");

  SolveReport report;
  report.solution = Vector::Zero(b.size());
  const double b_norm = b.norm();
  if (b_norm == 0.0) return report;

  const double stop = 1e-14 * b_norm;
  const std::size_t cap = std::min(max_iters, op.dim());
  if (method == SolverMethod::kLsqr) {
    lsqr(op, b, cap, stop, report);
  } else {
    conjugate_gradient(op, b, cap, stop, report);
  }
  report.final_residual_norm = (b - op.apply(report.solution)).norm();
  return report;
}

}  // namespace sqb
