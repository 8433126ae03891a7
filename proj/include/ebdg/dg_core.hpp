#pragma once

#include <Eigen/SparseCore>
#include <functional>

#include "ebdg/corrections.hpp"
#include "ebdg/types.hpp"

namespace ebdg {

using ScalarFunction = std::function<double(double)>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Uniform mesh of `cells` cells on [left, right]. Cells are 0-based here.
struct MeshSpec {
  int cells = 2;
  double left = 0.0;
  double right = 2.0;

  double dx() const { return (right - left) / cells; }
  double cell_left(int i) const { return left + i * dx(); }
  double cell_center(int i) const { return left + (i + 0.5) * dx(); }
  void validate() const;
};

/// Semi-discrete system M dU/dt = K U + load, unit advection speed.
/// Global ordering is cell-major, mode-minor.
struct DgOperator {
  int degree = 0;
  MeshSpec mesh;
  Vector mass;           // diagonal of the block-diagonal global mass matrix
  SparseMatrix stiffness;  // stiffness plus upwind flux terms
  Vector load;

  int block_size() const { return degree + 1; }
  int size() const { return static_cast<int>(mass.size()); }

  Matrix dense_mass() const { return mass.asDiagonal(); }
  Matrix dense_stiffness() const { return Matrix(stiffness); }
  /// Dense M^{-1} K.
  Matrix system_matrix() const;
  /// M^{-1} load.
  Vector scaled_load() const { return load.cwiseQuotient(mass); }
  /// M^{-1} (K u + load).
  Vector rhs(const Vector& u) const;
};

/// Periodic coupling: the first cell's inflow comes from the last cell.
DgOperator assemble_periodic(int p, const MeshSpec& mesh);

/// Embedded left boundary via a correction stencil; pure outflow on the right.
/// An empty `source` means s = 0. The Dirichlet datum enters only through the
/// load vector.
DgOperator assemble_embedded(int p, const MeshSpec& mesh, const CorrectionStencil& stencil,
                             double u_dirichlet, const ScalarFunction& source = {});

/// Per-cell L2 projection with p + 2 Gauss nodes.
Vector project_function(const ScalarFunction& f, int p, const MeshSpec& mesh);

/// || u_h - f ||_{L2(left, right)} with p + 2 Gauss nodes per cell.
double l2_error(const Vector& u, int p, const MeshSpec& mesh, const ScalarFunction& f);

/// Evaluates the discrete solution at x (cell containing x; right face goes
/// to the last cell).
double evaluate_solution(const Vector& u, int p, const MeshSpec& mesh, double x);

}  // namespace ebdg
