#pragma once

#include "ebdg/types.hpp"

namespace ebdg {

/// Point constraints v(x_bar_k) = u_D,k for a basis of arbitrary size and
/// dimension. Callers supply basis evaluations; no geometry is involved.
struct ConstraintSet {
  /// B x K, constraint_basis(j, k) = phi_j(x_bar_k).
  Matrix constraint_basis;
  /// K Dirichlet values.
  Vector dirichlet;
  /// B basis values at the evaluation point x~.
  Vector eval_basis;

  int basis_size() const { return static_cast<int>(constraint_basis.rows()); }
  int constraint_count() const { return static_cast<int>(constraint_basis.cols()); }
  /// Shape checks plus K <= B and full column rank (relative 1e-10).
  void validate() const;
};

enum class MultiKind { kEuclidean, kL2, kWeighted };

/// Distance metric for the multi-constraint reconstruction. `weight` is the
/// mass matrix for kL2 and the SPD weight for kWeighted; unused for kEuclidean.
struct MultiMetric {
  MultiKind kind = MultiKind::kEuclidean;
  Matrix weight;

  static MultiMetric euclidean() { return {MultiKind::kEuclidean, {}}; }
  static MultiMetric l2(Matrix mass) { return {MultiKind::kL2, std::move(mass)}; }
  static MultiMetric weighted(Matrix w) { return {MultiKind::kWeighted, std::move(w)}; }
};

struct MultiStencil {
  Vector alpha;           // K
  Vector modified_basis;  // B, eval_basis - constraint_basis * alpha

  double apply(const Vector& u, const Vector& dirichlet) const;
};

/// alpha^T = phi~^T W^{-1} Phi (Phi^T W^{-1} Phi)^{-1}, with the K x K system
/// solved by LDLT.
MultiStencil make_multi_stencil(const MultiMetric& metric, const ConstraintSet& constraints);

struct MultiKktSolution {
  Vector coefficients;  // B
  Vector multipliers;   // K
  double value = 0.0;
  double constraint_residual = 0.0;  // ||Phi^T v - u_D||_inf
};

/// Independent oracle: dense (B + K) saddle system [[W, Phi], [Phi^T, 0]].
MultiKktSolution kkt_multi_solve(const MultiMetric& metric, const ConstraintSet& constraints,
                                 const Vector& u);
double kkt_multi_value(const MultiMetric& metric, const ConstraintSet& constraints,
                       const Vector& u);

}  // namespace ebdg
