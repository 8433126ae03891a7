#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "ebdg/types.hpp"

namespace ebdg {

/// Embedded boundary geometry for the left (inflow) boundary in 1D.
///
/// The surrogate point is the left face of the first cell. The real boundary
/// sits at surrogate + distance; positive distance puts it inside the cell.
struct BoundaryGeometry {
  double surrogate = 0.0;
  double distance = 0.0;
  double dx = 1.0;

  double real_point() const { return surrogate + distance; }
  /// Reference coordinate of the real boundary in the first cell.
  double real_reference() const { return -1.0 + 2.0 * distance / dx; }
  /// Throws ValidationError unless dx > 0 and |distance| <= dx.
  void validate() const;
};

enum class CorrectionKind { kSB, kRodE, kRodL2, kRodW };

/// Coefficient coordinates in which the ROD-E / ROD-W distance is measured.
/// kNodal: values at p + 1 equispaced points of the cell; kModal: Legendre
/// coefficients.
enum class RodCoordinates { kNodal, kModal };

std::string to_string(CorrectionKind kind);
std::string to_string(RodCoordinates coords);
CorrectionKind parse_correction_kind(const std::string& text);
RodCoordinates parse_rod_coordinates(const std::string& text);

/// A correction kind plus its parameters.
struct CorrectionMethod {
  CorrectionKind kind = CorrectionKind::kRodE;
  RodCoordinates coordinates = RodCoordinates::kNodal;
  /// SPD weight, only for kRodW, expressed in `coordinates`.
  Matrix weight;

  static CorrectionMethod sb() { return {CorrectionKind::kSB, RodCoordinates::kNodal, {}}; }
  static CorrectionMethod rod_e(RodCoordinates c = RodCoordinates::kNodal) {
    return {CorrectionKind::kRodE, c, {}};
  }
  static CorrectionMethod rod_l2() { return {CorrectionKind::kRodL2, RodCoordinates::kModal, {}}; }
  static CorrectionMethod rod_w(Matrix w, RodCoordinates c = RodCoordinates::kNodal) {
    return {CorrectionKind::kRodW, c, std::move(w)};
  }
};

/// Affine boundary value v(x~) = modified_basis . u + alpha * u_D, where
/// modified_basis = phi(x~) - alpha * phi(x_bar) in the Legendre basis.
struct CorrectionStencil {
  double alpha = 1.0;
  Vector modified_basis;
  CorrectionMethod method;
  BoundaryGeometry geometry;
  int degree = 0;
};

/// Basis values at reference coordinate xi in the given coefficient
/// coordinates: Legendre values (modal) or equispaced Lagrange values (nodal).
Vector basis_values(RodCoordinates coords, int p, double xi);

/// c = T u maps Legendre coefficients to `coords` (identity or Vandermonde).
Matrix coordinate_transform(int p, RodCoordinates coords);

/// Mass matrix expressed in `coords`: T^{-T} M T^{-1}.
Matrix coordinate_mass_matrix(int p, double dx, RodCoordinates coords);

CorrectionStencil make_stencil(const CorrectionMethod& method, int p,
                               const BoundaryGeometry& geometry);

double corrected_value(const CorrectionStencil& stencil, const Vector& u, double u_dirichlet);

/// Solution of the constrained minimization written as a saddle-point system.
struct KktSolution {
  /// Minimizer in the metric's coefficient coordinates.
  Vector coefficients;
  /// Same minimizer as Legendre coefficients.
  Vector modal_coefficients;
  double multiplier = 0.0;
  /// v evaluated at the surrogate point.
  double value = 0.0;
  double residual = 0.0;
};

/// Independent oracle: assembles [[W, g], [g^T, 0]] [v; lambda] = [W u; u_D]
/// and solves it with partial-pivoting LU. kind must be a ROD variant.
KktSolution kkt_solve(const CorrectionMethod& method, int p, const BoundaryGeometry& geometry,
                      const Vector& u, double u_dirichlet);
double kkt_value(const CorrectionMethod& method, int p, const BoundaryGeometry& geometry,
                 const Vector& u, double u_dirichlet);

/// I - delta delta^T / (delta^T delta), delta = phi(x~) - phi(x_bar).
Matrix sb_weight_matrix(int p, const BoundaryGeometry& geometry);

/// alpha = phi~^T W^{-1} phi_bar / phi_bar^T W^{-1} phi_bar for a given
/// (possibly only semidefinite) inverse weight. Throws NumericalError when the
/// denominator is <= 1e-10.
double alpha_from_inverse_weight(const Matrix& inverse_weight, const Vector& phi_surrogate,
                                 const Vector& phi_real);

/// Read-mostly cache of stencils keyed by (method, p, d, dx).
class StencilCache {
 public:
  std::shared_ptr<const CorrectionStencil> get(const CorrectionMethod& method, int p,
                                               const BoundaryGeometry& geometry);
  std::size_t size() const;

 private:
  using Key = std::tuple<int, int, int, double, double, double, std::vector<double>>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const CorrectionStencil>> entries_;
};

}  // namespace ebdg
