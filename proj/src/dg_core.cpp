#include "ebdg/dg_core.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ebdg/basis.hpp"
#include "ebdg/errors.hpp"

namespace ebdg {

void MeshSpec::validate() const {
  if (cells < 2) throw ValidationError("mesh needs at least 2 cells");
  if (!(right > left)) throw ValidationError("mesh domain must satisfy left < right");
}

Matrix DgOperator::system_matrix() const {
  Matrix k = dense_stiffness();
  for (int r = 0; r < k.rows(); ++r) k.row(r) /= mass(r);
  return k;
}

Vector DgOperator::rhs(const Vector& u) const {
  return (stiffness * u + load).cwiseQuotient(mass);
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_block(Triplets& t, int row_cell, int col_cell, const Matrix& block) {
  const int b = static_cast<int>(block.rows());
  for (int m = 0; m < b; ++m) {
    for (int n = 0; n < b; ++n) {
      if (block(m, n) != 0.0) t.emplace_back(row_cell * b + m, col_cell * b + n, block(m, n));
    }
  }
}

struct LocalBlocks {
  Matrix interior;  // K^s - K^R
  Matrix upwind;    // K^L
  Vector left_trace;
};

LocalBlocks local_blocks(int p) {
  const Vector right = legendre_eval(p, 1.0);
  const Vector left = legendre_eval(p, -1.0);
  LocalBlocks lb;
  lb.interior = element_stiffness_matrix(p) - right * right.transpose();
  lb.upwind = left * right.transpose();
  lb.left_trace = left;
  return lb;
}

DgOperator make_shell(int p, const MeshSpec& mesh) {
  require_degree(p);
  mesh.validate();
  DgOperator op;
  op.degree = p;
  op.mesh = mesh;
  const Vector cell_mass = element_mass_diagonal(p, mesh.dx());
  op.mass = cell_mass.replicate(mesh.cells, 1);
  op.load = Vector::Zero(op.mass.size());
  op.stiffness.resize(op.mass.size(), op.mass.size());
  return op;
}

}  // namespace

DgOperator assemble_periodic(int p, const MeshSpec& mesh) {
  DgOperator op = make_shell(p, mesh);
  const LocalBlocks lb = local_blocks(p);
  Triplets t;
  for (int i = 0; i < mesh.cells; ++i) {
    add_block(t, i, i, lb.interior);
    add_block(t, i, (i + mesh.cells - 1) % mesh.cells, lb.upwind);
  }
  op.stiffness.setFromTriplets(t.begin(), t.end());
  return op;
}

DgOperator assemble_embedded(int p, const MeshSpec& mesh, const CorrectionStencil& stencil,
                             double u_dirichlet, const ScalarFunction& source) {
  DgOperator op = make_shell(p, mesh);
  const double dx = mesh.dx();
  if (stencil.degree != p) throw ValidationError("stencil degree does not match operator degree");
  if (std::abs(stencil.geometry.dx - dx) > 1e-12 * dx ||
      std::abs(stencil.geometry.surrogate - mesh.left) > 1e-12 * std::max(1.0, dx)) {
    throw ValidationError("stencil geometry does not match the mesh (cell length or left face)");
  }
  const LocalBlocks lb = local_blocks(p);
  Triplets t;
  const Matrix boundary = lb.interior + lb.left_trace * stencil.modified_basis.transpose();
  add_block(t, 0, 0, boundary);
  for (int i = 1; i < mesh.cells; ++i) {
    add_block(t, i, i, lb.interior);
    add_block(t, i, i - 1, lb.upwind);
  }
  op.stiffness.setFromTriplets(t.begin(), t.end());

  const int b = p + 1;
  op.load.head(b) += stencil.alpha * u_dirichlet * lb.left_trace;
  if (source) {
    const QuadratureRule q = gauss_legendre_rule(p + 2);
    for (int i = 0; i < mesh.cells; ++i) {
      const double xc = mesh.cell_center(i);
      for (std::size_t j = 0; j < q.size(); ++j) {
        const double s = source(xc + 0.5 * dx * q.nodes[j]);
        op.load.segment(i * b, b) += 0.5 * dx * q.weights[j] * s * legendre_eval(p, q.nodes[j]);
      }
    }
  }
  return op;
}

Vector project_function(const ScalarFunction& f, int p, const MeshSpec& mesh) {
  require_degree(p);
  mesh.validate();
  const int b = p + 1;
  const double dx = mesh.dx();
  const QuadratureRule q = gauss_legendre_rule(p + 2);
  Vector u = Vector::Zero(static_cast<Eigen::Index>(mesh.cells) * b);
  for (int i = 0; i < mesh.cells; ++i) {
    const double xc = mesh.cell_center(i);
    for (std::size_t j = 0; j < q.size(); ++j) {
      u.segment(i * b, b) += q.weights[j] * f(xc + 0.5 * dx * q.nodes[j]) *
                             legendre_eval(p, q.nodes[j]);
    }
    // (2k + 1)/dx * (dx/2) sum w f P_k
    for (int k = 0; k < b; ++k) u(i * b + k) *= (2.0 * k + 1.0) / 2.0;
  }
  return u;
}

double l2_error(const Vector& u, int p, const MeshSpec& mesh, const ScalarFunction& f) {
  const int b = p + 1;
  if (u.size() != static_cast<Eigen::Index>(mesh.cells) * b) {
    throw ValidationError("state length does not match mesh and degree");
  }
  const double dx = mesh.dx();
  const QuadratureRule q = gauss_legendre_rule(p + 2);
  double sum = 0.0;
  for (int i = 0; i < mesh.cells; ++i) {
    const double xc = mesh.cell_center(i);
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double uh = legendre_eval(p, q.nodes[j]).dot(u.segment(i * b, b));
      const double e = uh - f(xc + 0.5 * dx * q.nodes[j]);
      sum += 0.5 * dx * q.weights[j] * e * e;
    }
  }
  return std::sqrt(sum);
}

double evaluate_solution(const Vector& u, int p, const MeshSpec& mesh, double x) {
  const int b = p + 1;
  const double dx = mesh.dx();
  int i = static_cast<int>(std::floor((x - mesh.left) / dx));
  i = std::clamp(i, 0, mesh.cells - 1);
  const double xi = ReferenceBasis::to_reference(x, mesh.cell_center(i), dx);
  return legendre_eval(p, xi).dot(u.segment(i * b, b));
}

}  // namespace ebdg
