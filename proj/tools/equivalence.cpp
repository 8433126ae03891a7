#include "equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "ebdg/corrections.hpp"
#include "ebdg/errors.hpp"
#include "ebdg/rod_multi.hpp"

namespace ebdg::cli {

double EquivalenceReport::max_deviation() const {
  double m = 0.0;
  for (const auto& c : cases) m = std::max(m, c.max_deviation);
  return m;
}

namespace {

constexpr double kMaxConstraintCondition = 1e4;

double relative_deviation(double closed, double oracle, double input_norm) {
  return std::abs(closed - oracle) / std::max({1.0, std::abs(oracle), input_norm});
}

Vector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

Matrix random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  return a * a.transpose() + n * Matrix::Identity(n, n);
}

EquivalenceCase single_case(const std::string& name, CorrectionKind kind, RodCoordinates coords,
                            std::mt19937_64& rng, int instances) {
  std::uniform_int_distribution<int> degree(0, 6);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> length(0.05, 2.0);
  EquivalenceCase out{name, instances, 0.0};
  for (int n = 0; n < instances; ++n) {
    const int p = degree(rng);
    const double dx = length(rng);
    double frac = unit(rng);
    if (std::abs(frac) < 1e-3) frac = 0.5;
    const BoundaryGeometry geometry{unit(rng), frac * dx, dx};
    CorrectionMethod method{kind, coords, {}};
    if (kind == CorrectionKind::kRodW) method.weight = random_spd(rng, p + 1);
    const Vector u = random_vector(rng, p + 1);
    const double u_d = unit(rng);
    const double closed = corrected_value(make_stencil(method, p, geometry), u, u_d);
    const double oracle = kkt_value(method, p, geometry, u, u_d);
    out.max_deviation =
        std::max(out.max_deviation, relative_deviation(closed, oracle, u.norm() + std::abs(u_d)));
  }
  return out;
}

EquivalenceCase multi_case(const std::string& name, MultiKind kind, std::mt19937_64& rng,
                           int instances) {
  std::uniform_int_distribution<int> basis(1, 9);
  EquivalenceCase out{name, instances, 0.0};
  for (int n = 0; n < instances; ++n) {
    const int b = basis(rng);
    const int k = std::uniform_int_distribution<int>(1, b)(rng);
    ConstraintSet cs;
    cs.constraint_basis = Matrix(b, k);
    for (int j = 0; j < k; ++j) cs.constraint_basis.col(j) = random_vector(rng, b);
    cs.dirichlet = random_vector(rng, k);
    cs.eval_basis = random_vector(rng, b);
    MultiMetric metric;
    metric.kind = kind;
    if (kind != MultiKind::kEuclidean) metric.weight = random_spd(rng, b);
    const Vector u = random_vector(rng, b);
    // Resample draws whose constraint matrix is badly conditioned; both
    // routes then lose digits in proportion to cond(Phi) and the comparison
    // says nothing about the algebra.
    const Vector sv = Eigen::JacobiSVD<Matrix>(cs.constraint_basis).singularValues();
    if (sv(sv.size() - 1) * kMaxConstraintCondition < sv(0)) {
      --n;
      continue;
    }
    const double closed = make_multi_stencil(metric, cs).apply(u, cs.dirichlet);
    const double oracle = kkt_multi_value(metric, cs, u);
    out.max_deviation = std::max(
        out.max_deviation, relative_deviation(closed, oracle, u.norm() + cs.dirichlet.norm()));
  }
  return out;
}

}  // namespace

EquivalenceReport verify_equivalence(std::uint64_t seed, int instances_per_kind) {
  if (instances_per_kind < 1) throw ValidationError("verify-equivalence: need >= 1 instance");
  std::mt19937_64 rng(seed);
  EquivalenceReport report;
  const int n = instances_per_kind;
  report.cases.push_back(
      single_case("rod-e/nodal", CorrectionKind::kRodE, RodCoordinates::kNodal, rng, n));
  report.cases.push_back(
      single_case("rod-e/modal", CorrectionKind::kRodE, RodCoordinates::kModal, rng, n));
  report.cases.push_back(
      single_case("rod-l2", CorrectionKind::kRodL2, RodCoordinates::kModal, rng, n));
  report.cases.push_back(
      single_case("rod-w/nodal", CorrectionKind::kRodW, RodCoordinates::kNodal, rng, n));
  report.cases.push_back(
      single_case("rod-w/modal", CorrectionKind::kRodW, RodCoordinates::kModal, rng, n));
  report.cases.push_back(multi_case("multi/euclidean", MultiKind::kEuclidean, rng, n));
  report.cases.push_back(multi_case("multi/l2", MultiKind::kL2, rng, n));
  report.cases.push_back(multi_case("multi/weighted", MultiKind::kWeighted, rng, n));
  return report;
}

}  // namespace ebdg::cli
