#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace ebdg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;
using ComplexList = std::vector<Complex>;

/// Largest supported polynomial degree.
inline constexpr int kMaxDegree = 12;

}  // namespace ebdg
