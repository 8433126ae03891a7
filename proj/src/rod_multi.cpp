#include "ebdg/rod_multi.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <sstream>

#include "ebdg/errors.hpp"

namespace ebdg {

namespace {

constexpr double kRankTolerance = 1e-10;

Matrix metric_weight(const MultiMetric& metric, int b) {
  if (metric.kind == MultiKind::kEuclidean) return Matrix::Identity(b, b);
  const Matrix& w = metric.weight;
  if (w.rows() != b || w.cols() != b) {
    throw ValidationError("metric weight must be " + std::to_string(b) + "x" + std::to_string(b));
  }
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("metric weight is not symmetric");
  }
  if (Eigen::LLT<Matrix>(w).info() != Eigen::Success) {
    throw ValidationError("metric weight is not positive definite");
  }
  return w;
}

}  // namespace

void ConstraintSet::validate() const {
  const int b = basis_size();
  const int k = constraint_count();
  if (b == 0 || k == 0) throw ValidationError("empty constraint set");
  if (dirichlet.size() != k) throw ValidationError("Dirichlet data length must equal K");
  if (eval_basis.size() != b) throw ValidationError("evaluation basis length must equal B");
  if (k > b) {
    throw ValidationError("more constraints (" + std::to_string(k) + ") than basis functions (" +
                          std::to_string(b) + ")");
  }
  // Singular values of Phi from the eigenvalues of the normal matrix.
  const Matrix normal = constraint_basis.transpose() * constraint_basis;
  Eigen::SelfAdjointEigenSolver<Matrix> es(normal, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = std::max(0.0, es.eigenvalues().minCoeff());
  const double ratio = lmax > 0.0 ? std::sqrt(lmin / lmax) : 0.0;
  if (!(ratio > kRankTolerance)) {
    std::ostringstream msg;
    msg << "rank-deficient constraint matrix: sigma_min / sigma_max = " << ratio
        << " <= " << kRankTolerance;
    throw ValidationError(msg.str());
  }
}

double MultiStencil::apply(const Vector& u, const Vector& dirichlet) const {
  if (u.size() != modified_basis.size() || dirichlet.size() != alpha.size()) {
    throw ValidationError("multi-stencil input length mismatch");
  }
  return modified_basis.dot(u) + alpha.dot(dirichlet);
}

MultiStencil make_multi_stencil(const MultiMetric& metric, const ConstraintSet& constraints) {
  constraints.validate();
  const int b = constraints.basis_size();
  const Matrix& phi = constraints.constraint_basis;

  Matrix w_inv_phi;
  Vector w_inv_eval;
  if (metric.kind == MultiKind::kEuclidean) {
    w_inv_phi = phi;
    w_inv_eval = constraints.eval_basis;
  } else {
    const auto ldlt = metric_weight(metric, b).ldlt();
    w_inv_phi = ldlt.solve(phi);
    w_inv_eval = ldlt.solve(constraints.eval_basis);
  }
  // (Phi^T W^-1 Phi) alpha = Phi^T W^-1 phi~
  const Matrix gram = phi.transpose() * w_inv_phi;
  const auto gram_ldlt = gram.ldlt();
  if (gram_ldlt.info() != Eigen::Success) {
    throw NumericalError("constraint Gram matrix factorization failed");
  }
  MultiStencil s;
  s.alpha = gram_ldlt.solve(phi.transpose() * w_inv_eval);
  s.modified_basis = constraints.eval_basis - phi * s.alpha;
  // One refinement sweep on the weighted residual phi~ - Phi alpha; the Gram
  // solve alone loses accuracy with the square of cond(Phi).
  Vector w_inv_residual = s.modified_basis;
  if (metric.kind != MultiKind::kEuclidean) {
    w_inv_residual = metric_weight(metric, b).ldlt().solve(s.modified_basis);
  }
  s.alpha += gram_ldlt.solve(phi.transpose() * w_inv_residual);
  s.modified_basis = constraints.eval_basis - phi * s.alpha;
  return s;
}

MultiKktSolution kkt_multi_solve(const MultiMetric& metric, const ConstraintSet& constraints,
                                 const Vector& u) {
  constraints.validate();
  const int b = constraints.basis_size();
  const int k = constraints.constraint_count();
  if (u.size() != b) throw ValidationError("coefficient vector length must equal B");
  const Matrix w = metric_weight(metric, b);

  Matrix saddle = Matrix::Zero(b + k, b + k);
  saddle.topLeftCorner(b, b) = w;
  saddle.topRightCorner(b, k) = constraints.constraint_basis;
  saddle.bottomLeftCorner(k, b) = constraints.constraint_basis.transpose();
  Vector rhs(b + k);
  rhs.head(b) = w * u;
  rhs.tail(k) = constraints.dirichlet;

  const Eigen::PartialPivLU<Matrix> lu(saddle);
  Vector sol = lu.solve(rhs);
  sol += lu.solve(rhs - saddle * sol);  // one refinement sweep
  if (!sol.allFinite()) throw NumericalError("singular multi-constraint saddle system");
  MultiKktSolution out;
  out.coefficients = sol.head(b);
  out.multipliers = sol.tail(k);
  out.value = constraints.eval_basis.dot(out.coefficients);
  out.constraint_residual =
      (constraints.constraint_basis.transpose() * out.coefficients - constraints.dirichlet)
          .cwiseAbs()
          .maxCoeff();
  const double scale = 1.0 + constraints.dirichlet.cwiseAbs().maxCoeff();
  if (out.constraint_residual > 1e-10 * scale) {
    throw NumericalError("multi-constraint saddle solve violates constraints (residual " +
                         std::to_string(out.constraint_residual) + ")");
  }
  return out;
}

double kkt_multi_value(const MultiMetric& metric, const ConstraintSet& constraints,
                       const Vector& u) {
  return kkt_multi_solve(metric, constraints, u).value;
}

}  // namespace ebdg
