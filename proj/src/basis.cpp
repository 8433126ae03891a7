#include "ebdg/basis.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ebdg/errors.hpp"

namespace ebdg {

void require_degree(int p) {
  if (p < 0 || p > kMaxDegree) {
    throw ValidationError("polynomial degree " + std::to_string(p) +
                          " outside [0, " + std::to_string(kMaxDegree) + "]");
  }
}

ReferenceBasis::ReferenceBasis(int degree) : degree_(degree) {
  require_degree(degree);
}

Vector ReferenceBasis::eval(double xi) const { return legendre_eval(degree_, xi); }
Vector ReferenceBasis::deriv(double xi) const { return legendre_deriv(degree_, xi); }

Vector legendre_eval(int p, double xi) {
  require_degree(p);
  Vector v(p + 1);
  v(0) = 1.0;
  if (p >= 1) v(1) = xi;
  for (int k = 1; k < p; ++k) {
    v(k + 1) = ((2.0 * k + 1.0) * xi * v(k) - k * v(k - 1)) / (k + 1.0);
  }
  return v;
}

Vector legendre_deriv(int p, double xi) {
  require_degree(p);
  // P_{k+1}' = P_{k-1}' + (2k + 1) P_k
  const Vector vals = legendre_eval(p, xi);
  Vector d = Vector::Zero(p + 1);
  if (p >= 1) d(1) = 1.0;
  for (int k = 1; k < p; ++k) {
    d(k + 1) = d(k - 1) + (2.0 * k + 1.0) * vals(k);
  }
  return d;
}

namespace {

// P_n and P_n' at x, for arbitrary n (no degree cap; quadrature needs n <= 16).
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double pm1 = 1.0;
  double pk = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0) * x * pk - k * pm1) / (k + 1.0);
    pm1 = pk;
    pk = next;
  }
  const double dp = n * (x * pk - pm1) / (x * x - 1.0);
  return {pk, dp};
}

}  // namespace

QuadratureRule gauss_legendre_rule(int n) {
  if (n < 1 || n > 16) {
    throw ValidationError("Gauss-Legendre node count " + std::to_string(n) +
                          " outside [1, 16]");
  }
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = std::numbers::pi;
  for (int i = 1; i <= n; ++i) {
    // Bruns: the i-th root (descending) has angle in
    // ((i - 1/2) pi / (n + 1/2), i pi / (n + 1/2)).
    double lo = std::cos(i * pi / (n + 0.5));
    double hi = std::cos((i - 0.5) * pi / (n + 0.5));
    double f_lo = legendre_with_derivative(n, lo).first;
    double x = std::cos((i - 0.25) * pi / (n + 0.5));
    for (int it = 0; it < 200; ++it) {
      const auto [f, df] = legendre_with_derivative(n, x);
      if (f == 0.0) break;
      if ((f < 0.0) == (f_lo < 0.0)) {
        lo = x;
        f_lo = f;
      } else {
        hi = x;
      }
      double next = x - f / df;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::abs(next - x);
      x = next;
      if (step <= 1e-15 || hi - lo <= 1e-15) break;
    }
    const double dp = legendre_with_derivative(n, x).second;
    const int idx = n - i;  // ascending order
    rule.nodes[idx] = x;
    rule.weights[idx] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

Vector element_mass_diagonal(int p, double dx) {
  require_degree(p);
  if (!(dx > 0.0)) throw ValidationError("cell length must be positive");
  Vector m(p + 1);
  for (int k = 0; k <= p; ++k) m(k) = dx / (2.0 * k + 1.0);
  return m;
}

Matrix element_mass_matrix(int p, double dx) {
  return element_mass_diagonal(p, dx).asDiagonal();
}

Matrix element_stiffness_matrix(int p) {
  require_degree(p);
  Matrix k = Matrix::Zero(p + 1, p + 1);
  for (int m = 0; m <= p; ++m) {
    for (int n = 0; n < m; ++n) {
      if ((m - n) % 2 == 1) k(m, n) = 2.0;
    }
  }
  return k;
}

std::vector<double> equispaced_nodes(int p) {
  require_degree(p);
  if (p == 0) return {0.0};
  std::vector<double> nodes(p + 1);
  for (int i = 0; i <= p; ++i) nodes[i] = -1.0 + 2.0 * i / p;
  return nodes;
}

Matrix nodal_vandermonde(int p) {
  const auto nodes = equispaced_nodes(p);
  Matrix v(p + 1, p + 1);
  for (int i = 0; i <= p; ++i) v.row(i) = legendre_eval(p, nodes[i]).transpose();
  return v;
}

Vector lagrange_cardinal_eval(int p, double xi) {
  const auto nodes = equispaced_nodes(p);
  Vector l = Vector::Ones(p + 1);
  for (int j = 0; j <= p; ++j) {
    for (int m = 0; m <= p; ++m) {
      if (m != j) l(j) *= (xi - nodes[m]) / (nodes[j] - nodes[m]);
    }
  }
  return l;
}

}  // namespace ebdg
