#include "ebdg/corrections.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <mutex>

#include "ebdg/basis.hpp"
#include "ebdg/errors.hpp"

namespace ebdg {

void BoundaryGeometry::validate() const {
  if (!(dx > 0.0) || !std::isfinite(dx)) {
    throw ValidationError("boundary geometry: cell length must be positive");
  }
  if (!std::isfinite(distance) || std::abs(distance) > dx * (1.0 + 1e-14)) {
    throw ValidationError("boundary geometry: |d| = " + std::to_string(std::abs(distance)) +
                          " exceeds the cell length " + std::to_string(dx));
  }
}

std::string to_string(CorrectionKind kind) {
  switch (kind) {
    case CorrectionKind::kSB: return "sb";
    case CorrectionKind::kRodE: return "rod-e";
    case CorrectionKind::kRodL2: return "rod-l2";
    case CorrectionKind::kRodW: return "rod-w";
  }
  return "?";
}

std::string to_string(RodCoordinates coords) {
  return coords == RodCoordinates::kNodal ? "nodal" : "modal";
}

CorrectionKind parse_correction_kind(const std::string& text) {
  if (text == "sb") return CorrectionKind::kSB;
  if (text == "rod-e") return CorrectionKind::kRodE;
  if (text == "rod-l2") return CorrectionKind::kRodL2;
  if (text == "rod-w") return CorrectionKind::kRodW;
  throw ValidationError("unknown correction method '" + text + "'");
}

RodCoordinates parse_rod_coordinates(const std::string& text) {
  if (text == "nodal") return RodCoordinates::kNodal;
  if (text == "modal") return RodCoordinates::kModal;
  throw ValidationError("unknown ROD coordinates '" + text + "'");
}

Vector basis_values(RodCoordinates coords, int p, double xi) {
  return coords == RodCoordinates::kNodal ? lagrange_cardinal_eval(p, xi)
                                          : legendre_eval(p, xi);
}

Matrix coordinate_transform(int p, RodCoordinates coords) {
  require_degree(p);
  return coords == RodCoordinates::kNodal ? nodal_vandermonde(p)
                                          : Matrix::Identity(p + 1, p + 1);
}

Matrix coordinate_mass_matrix(int p, double dx, RodCoordinates coords) {
  const Matrix t = coordinate_transform(p, coords);
  const Matrix t_inv = t.partialPivLu().inverse();
  return t_inv.transpose() * element_mass_matrix(p, dx) * t_inv;
}

namespace {

void require_spd(const Matrix& w, int size) {
  if (w.rows() != size || w.cols() != size) {
    throw ValidationError("ROD-W weight must be " + std::to_string(size) + "x" +
                          std::to_string(size));
  }
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("ROD-W weight is not symmetric");
  }
  Eigen::LLT<Matrix> llt(w);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("ROD-W weight is not positive definite");
  }
}

double ratio_or_throw(double num, double den) {
  if (!(den > 1e-10)) {
    throw NumericalError("degenerate correction weight: denominator " + std::to_string(den));
  }
  return num / den;
}

// alpha for each kind, from direct basis evaluations where possible.
double compute_alpha(const CorrectionMethod& method, int p, const BoundaryGeometry& g) {
  const double xi_t = -1.0;
  const double xi_b = g.real_reference();
  switch (method.kind) {
    case CorrectionKind::kSB:
      return 1.0;
    case CorrectionKind::kRodE: {
      const Vector pt = basis_values(method.coordinates, p, xi_t);
      const Vector pb = basis_values(method.coordinates, p, xi_b);
      return ratio_or_throw(pt.dot(pb), pb.dot(pb));
    }
    case CorrectionKind::kRodL2: {
      const Vector pt = legendre_eval(p, xi_t);
      const Vector pb = legendre_eval(p, xi_b);
      double num = 0.0;
      double den = 0.0;
      for (int k = 0; k <= p; ++k) {
        const double m_inv = (2.0 * k + 1.0) / g.dx;
        num += pt(k) * m_inv * pb(k);
        den += pb(k) * m_inv * pb(k);
      }
      return ratio_or_throw(num, den);
    }
    case CorrectionKind::kRodW: {
      require_spd(method.weight, p + 1);
      const Vector pt = basis_values(method.coordinates, p, xi_t);
      const Vector pb = basis_values(method.coordinates, p, xi_b);
      const Vector w_inv_pb = method.weight.ldlt().solve(pb);
      return ratio_or_throw(pt.dot(w_inv_pb), pb.dot(w_inv_pb));
    }
  }
  throw ValidationError("unknown correction kind");
}

}  // namespace

CorrectionStencil make_stencil(const CorrectionMethod& method, int p,
                               const BoundaryGeometry& geometry) {
  require_degree(p);
  geometry.validate();
  CorrectionStencil s;
  s.method = method;
  s.geometry = geometry;
  s.degree = p;
  s.alpha = compute_alpha(method, p, geometry);
  s.modified_basis = legendre_eval(p, -1.0) - s.alpha * legendre_eval(p, geometry.real_reference());
  return s;
}

double corrected_value(const CorrectionStencil& stencil, const Vector& u, double u_dirichlet) {
  if (u.size() != stencil.modified_basis.size()) {
    throw ValidationError("coefficient vector has length " + std::to_string(u.size()) +
                          ", stencil expects " + std::to_string(stencil.modified_basis.size()));
  }
  return stencil.modified_basis.dot(u) + stencil.alpha * u_dirichlet;
}

KktSolution kkt_solve(const CorrectionMethod& method, int p, const BoundaryGeometry& geometry,
                      const Vector& u, double u_dirichlet) {
  require_degree(p);
  geometry.validate();
  const int b = p + 1;
  if (u.size() != b) throw ValidationError("coefficient vector length mismatch");

  // Work in the coordinates where the distance is defined.
  RodCoordinates coords = method.coordinates;
  Matrix weight;
  switch (method.kind) {
    case CorrectionKind::kRodE:
      weight = Matrix::Identity(b, b);
      break;
    case CorrectionKind::kRodL2:
      coords = RodCoordinates::kModal;
      weight = element_mass_matrix(p, geometry.dx);
      break;
    case CorrectionKind::kRodW:
      require_spd(method.weight, b);
      weight = method.weight;
      break;
    case CorrectionKind::kSB:
      throw ValidationError("the SB correction has no minimization form");
  }

  // Coefficients of u_h in `coords`: nodal values are point evaluations.
  Vector c_u(b);
  if (coords == RodCoordinates::kNodal) {
    const auto nodes = equispaced_nodes(p);
    for (int i = 0; i < b; ++i) c_u(i) = legendre_eval(p, nodes[i]).dot(u);
  } else {
    c_u = u;
  }
  const Vector g_real = basis_values(coords, p, geometry.real_reference());
  const Vector g_surr = basis_values(coords, p, -1.0);

  Matrix saddle = Matrix::Zero(b + 1, b + 1);
  saddle.topLeftCorner(b, b) = weight;
  saddle.block(0, b, b, 1) = g_real;
  saddle.block(b, 0, 1, b) = g_real.transpose();
  Vector rhs(b + 1);
  rhs.head(b) = weight * c_u;
  rhs(b) = u_dirichlet;

  Eigen::PartialPivLU<Matrix> lu(saddle);
  const Vector sol = lu.solve(rhs);
  KktSolution out;
  out.coefficients = sol.head(b);
  out.multiplier = sol(b);
  out.value = g_surr.dot(out.coefficients);
  out.residual = (saddle * sol - rhs).norm();
  if (!std::isfinite(out.residual) || out.residual > 1e-11 * std::max(1.0, rhs.norm())) {
    throw NumericalError("KKT saddle system solve failed (residual " +
                         std::to_string(out.residual) + ")");
  }
  out.modal_coefficients = coords == RodCoordinates::kNodal
                               ? Vector(nodal_vandermonde(p).partialPivLu().solve(out.coefficients))
                               : out.coefficients;
  return out;
}

double kkt_value(const CorrectionMethod& method, int p, const BoundaryGeometry& geometry,
                 const Vector& u, double u_dirichlet) {
  return kkt_solve(method, p, geometry, u, u_dirichlet).value;
}

Matrix sb_weight_matrix(int p, const BoundaryGeometry& geometry) {
  require_degree(p);
  geometry.validate();
  if (geometry.distance == 0.0) {
    throw ValidationError("SB weight matrix undefined at d = 0 (delta vanishes)");
  }
  const Vector delta = legendre_eval(p, -1.0) - legendre_eval(p, geometry.real_reference());
  if (delta.squaredNorm() == 0.0) {
    throw ValidationError("SB weight matrix undefined: delta vanishes");
  }
  const int b = p + 1;
  return Matrix::Identity(b, b) - delta * delta.transpose() / delta.squaredNorm();
}

double alpha_from_inverse_weight(const Matrix& inverse_weight, const Vector& phi_surrogate,
                                 const Vector& phi_real) {
  const Vector w = inverse_weight * phi_real;
  return ratio_or_throw(phi_surrogate.dot(w), phi_real.dot(w));
}

std::shared_ptr<const CorrectionStencil> StencilCache::get(const CorrectionMethod& method,
                                                           int p,
                                                           const BoundaryGeometry& geometry) {
  Key key{static_cast<int>(method.kind),
          static_cast<int>(method.coordinates),
          p,
          geometry.surrogate,
          geometry.distance,
          geometry.dx,
          std::vector<double>(method.weight.data(), method.weight.data() + method.weight.size())};
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto stencil = std::make_shared<const CorrectionStencil>(make_stencil(method, p, geometry));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.try_emplace(std::move(key), std::move(stencil));
  return it->second;
}

std::size_t StencilCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace ebdg
