#pragma once

// Reference computations for the unit tests. Each one reaches the same
// quantity as the library by a different route.

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <vector>

#include "ebdg/types.hpp"

namespace ebdg::oracle {

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// P_n(x) = 2^-n sum_k C(n,k)^2 (x-1)^(n-k) (x+1)^k.
inline double legendre(int n, double x) {
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    s += binomial(n, k) * binomial(n, k) * std::pow(x - 1.0, n - k) * std::pow(x + 1.0, k);
  }
  return s / std::pow(2.0, n);
}

/// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the Legendre
/// recurrence, weights 2 v_0^2.
inline void golub_welsch(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Matrix j = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(j);
  nodes.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) weights[i] = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
}

/// Legendre values from the explicit sum formula.
inline Vector legendre_vector(int p, double x) {
  Vector v(p + 1);
  for (int k = 0; k <= p; ++k) v[k] = legendre(k, x);
  return v;
}

/// Integrates f over [-1, 1] with a Golub-Welsch rule.
template <typename F>
double integrate(F&& f, int n = 20) {
  std::vector<double> x, w;
  golub_welsch(n, x, w);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += w[i] * f(x[i]);
  return s;
}

inline Vector random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline Matrix random_spd(std::mt19937_64& rng, int n) {
  Matrix a(n, n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) a(i, k) = g(rng);
  return a * a.transpose() + n * Matrix::Identity(n, n);
}

}  // namespace ebdg::oracle
