#pragma once

#include <vector>

#include "ebdg/types.hpp"

namespace ebdg {

/// Gauss-Legendre rule on the reference interval [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Unnormalized Legendre modal basis of degree p on the reference element.
///
/// A physical cell [xc - dx/2, xc + dx/2] maps to the reference element via
/// xi = 2 (x - xc) / dx. P_k(1) = 1 and P_k(-1) = (-1)^k.
class ReferenceBasis {
 public:
  explicit ReferenceBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }

  Vector eval(double xi) const;
  Vector deriv(double xi) const;

  static double to_reference(double x, double center, double dx) {
    return 2.0 * (x - center) / dx;
  }

 private:
  int degree_;
};

/// [P_0(xi), ..., P_p(xi)] by the three-term recurrence. Any finite xi is
/// accepted (evaluation outside [-1, 1] is needed for off-cell boundaries).
Vector legendre_eval(int p, double xi);

/// [P_0'(xi), ..., P_p'(xi)].
Vector legendre_deriv(int p, double xi);

/// n-point Gauss-Legendre rule, 1 <= n <= 16. Nodes ascending.
QuadratureRule gauss_legendre_rule(int n);

/// Diagonal Legendre mass matrix, entries dx / (2k + 1).
Matrix element_mass_matrix(int p, double dx);
Vector element_mass_diagonal(int p, double dx);

/// K^s(m, n) = int P_m'(xi) P_n(xi) dxi; 2 when m - n is odd and positive.
Matrix element_stiffness_matrix(int p);

/// p + 1 equispaced reference nodes including both endpoints ({0} for p = 0).
std::vector<double> equispaced_nodes(int p);

/// V(i, k) = P_k(xi_i) at the equispaced nodes; maps modal coefficients to
/// nodal values.
Matrix nodal_vandermonde(int p);

/// Values of the equispaced Lagrange cardinal functions at xi, computed from
/// the product formula (not through the Vandermonde matrix).
Vector lagrange_cardinal_eval(int p, double xi);

void require_degree(int p);

}  // namespace ebdg
