#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ebdg/basis.hpp"
#include "ebdg/dg_core.hpp"
#include "ebdg/errors.hpp"
#include "ebdg/stability.hpp"
#include "oracles.hpp"

namespace ebdg {
namespace {

// Dense assembly straight from the weak form: entries are integrals of
// basis products evaluated by quadrature and traces from the explicit
// Legendre formula.
Matrix reference_stiffness(int p, int cells, const Vector* modified_basis) {
  const int b = p + 1;
  Matrix k = Matrix::Zero(cells * b, cells * b);
  const double h = 1e-5;
  for (int i = 0; i < cells; ++i) {
    for (int m = 0; m < b; ++m) {
      for (int n = 0; n < b; ++n) {
        const double vol = oracle::integrate([&](double x) {
          const double dpm = (oracle::legendre(m, x + h) - oracle::legendre(m, x - h)) / (2 * h);
          return dpm * oracle::legendre(n, x);
        });
        k(i * b + m, i * b + n) += std::round(vol * 1e4) / 1e4;  // exact integers
        k(i * b + m, i * b + n) -= oracle::legendre(m, 1.0) * oracle::legendre(n, 1.0);
        if (i > 0) {
          k(i * b + m, (i - 1) * b + n) += oracle::legendre(m, -1.0) * oracle::legendre(n, 1.0);
        } else if (modified_basis != nullptr) {
          k(m, n) += oracle::legendre(m, -1.0) * (*modified_basis)[n];
        } else {
          k(m, (cells - 1) * b + n) += oracle::legendre(m, -1.0) * oracle::legendre(n, 1.0);
        }
      }
    }
  }
  return k;
}

TEST(Mesh, Geometry) {
  const MeshSpec mesh{4, 0.0, 2.0};
  EXPECT_DOUBLE_EQ(mesh.dx(), 0.5);
  EXPECT_DOUBLE_EQ(mesh.cell_left(2), 1.0);
  EXPECT_DOUBLE_EQ(mesh.cell_center(0), 0.25);
  EXPECT_THROW((MeshSpec{1, 0.0, 1.0}.validate()), ValidationError);
  EXPECT_THROW((MeshSpec{3, 1.0, 1.0}.validate()), ValidationError);
}

TEST(Periodic, FirstOrderUpwind) {
  const DgOperator op = assemble_periodic(0, {2, 0.0, 2.0});
  Matrix expected(2, 2);
  expected << -1, 1, 1, -1;
  EXPECT_EQ(op.dense_stiffness(), expected);
  EXPECT_EQ(op.dense_mass(), Matrix::Identity(2, 2));
  EXPECT_EQ(op.load, Vector::Zero(2));
}

TEST(Periodic, MatchesWeakFormAssembly) {
  for (int p = 0; p <= 5; ++p) {
    for (int cells : {2, 3, 5}) {
      const DgOperator op = assemble_periodic(p, {cells, 0.0, 1.0 * cells});
      EXPECT_LE((op.dense_stiffness() - reference_stiffness(p, cells, nullptr)).cwiseAbs().maxCoeff(),
                1e-12);
    }
  }
}

TEST(Periodic, ConstantsAreSteady) {
  for (int p = 0; p <= 6; ++p) {
    for (int cells : {2, 3, 7}) {
      const DgOperator op = assemble_periodic(p, {cells, -1.0, 2.5});
      Vector constant = Vector::Zero(op.size());
      for (int i = 0; i < cells; ++i) constant[i * (p + 1)] = 1.7;
      EXPECT_LE(Vector(op.stiffness * constant).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
}

TEST(Periodic, LinearHasZeroEigenvalue) {
  const ComplexList eigs = eigenvalues_dense(assemble_periodic(1, {2, 0.0, 2.0}).system_matrix());
  double closest = 1e300;
  for (const Complex& z : eigs) closest = std::min(closest, std::abs(z));
  EXPECT_LE(closest, 1e-12);
}

TEST(Periodic, ConservesTotalMass) {
  std::mt19937_64 rng(3);
  for (int p = 0; p <= 6; ++p) {
    const DgOperator op = assemble_periodic(p, {4, 0.0, 2.0});
    Vector constant = Vector::Zero(op.size());
    for (int i = 0; i < 4; ++i) constant[i * (p + 1)] = 1.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Vector u = oracle::random_vector(rng, op.size());
      // 1^T M (M^{-1} K u)
      const double rate = constant.dot(op.mass.cwiseProduct(op.system_matrix() * u));
      EXPECT_LE(std::abs(rate), 1e-12 * (1.0 + u.norm()));
    }
  }
}

TEST(Embedded, MatchesWeakFormAssembly) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int p = 0; p <= 5; ++p) {
    for (auto m : {CorrectionMethod::sb(), CorrectionMethod::rod_e(), CorrectionMethod::rod_l2()}) {
      const MeshSpec mesh{3, 0.0, 3.0};
      const CorrectionStencil s = make_stencil(m, p, {0.0, dist(rng), 1.0});
      const DgOperator op = assemble_embedded(p, mesh, s, 0.0);
      EXPECT_LE((op.dense_stiffness() - reference_stiffness(p, 3, &s.modified_basis))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-12);
    }
  }
}

TEST(Embedded, FittedBoundaryImposesDatumThroughFlux) {
  for (int p = 0; p <= 4; ++p) {
    const MeshSpec mesh{3, 0.0, 1.5};
    for (auto m : {CorrectionMethod::sb(), CorrectionMethod::rod_e(), CorrectionMethod::rod_l2()}) {
      const CorrectionStencil s = make_stencil(m, p, {0.0, 0.0, mesh.dx()});
      const DgOperator op = assemble_embedded(p, mesh, s, 0.8);
      const Matrix k = op.dense_stiffness();
      const Matrix interior =
          element_stiffness_matrix(p) - legendre_eval(p, 1.0) * legendre_eval(p, 1.0).transpose();
      EXPECT_LE((k.topLeftCorner(p + 1, p + 1) - interior).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_LE((op.load.head(p + 1) - 0.8 * legendre_eval(p, -1.0)).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_LE(op.load.tail(op.size() - p - 1).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(Embedded, LinearBoundaryBlockAtZeroDistance) {
  const MeshSpec mesh{2, 0.0, 2.0};
  const CorrectionStencil s = make_stencil(CorrectionMethod::rod_e(), 1, {0.0, 0.0, 1.0});
  const Matrix a = assemble_embedded(1, mesh, s, 0.0).system_matrix();
  Matrix expected(2, 2);
  expected << -1, -1, 3, -3;
  EXPECT_LE((a.topLeftCorner(2, 2) - expected).cwiseAbs().maxCoeff(), 1e-15);
  const ComplexList eigs = eigenvalues_dense(a.topLeftCorner(2, 2));
  EXPECT_NEAR(eigs[0].real(), -2.0, 1e-14);
  EXPECT_NEAR(std::abs(eigs[0].imag()), std::sqrt(2.0), 1e-14);
}

TEST(Embedded, OnlyBoundaryCellDependsOnCorrection) {
  for (int p = 0; p <= 4; ++p) {
    const MeshSpec mesh{4, 0.0, 4.0};
    const DgOperator per = assemble_periodic(p, mesh);
    const int b = p + 1;
    for (double d : {-0.9, -0.2, 0.6}) {
      const DgOperator emb =
          assemble_embedded(p, mesh, make_stencil(CorrectionMethod::rod_l2(), p, {0.0, d, 1.0}), 0.0);
      const Matrix ke = emb.dense_stiffness();
      const Matrix kp = per.dense_stiffness();
      EXPECT_EQ(ke.bottomRows(3 * b), kp.bottomRows(3 * b));
    }
  }
}

TEST(Embedded, SpectrumIsUnionOfDiagonalBlocks) {
  // Two cells: the boundary block and one interior block have distinct
  // spectra, so eigenvalues can be matched pointwise.
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int p = 0; p <= 4; ++p) {
    const double d = dist(rng);
    const MeshSpec mesh{2, 0.5, 2.5};
    const CorrectionStencil s = make_stencil(CorrectionMethod::rod_e(), p, {0.5, d, 1.0});
    const Matrix a = assemble_embedded(p, mesh, s, 0.0).system_matrix();
    const int b = p + 1;
    ComplexList blocks = eigenvalues_dense(a.topLeftCorner(b, b));
    const ComplexList interior = eigenvalues_dense(a.block(b, b, b, b));
    blocks.insert(blocks.end(), interior.begin(), interior.end());
    const ComplexList full = eigenvalues_dense(a);
    ASSERT_EQ(full.size(), blocks.size());
    std::vector<bool> used(blocks.size(), false);
    for (const Complex& z : full) {
      double best = 1e300;
      std::size_t at = 0;
      for (std::size_t j = 0; j < blocks.size(); ++j) {
        if (!used[j] && std::abs(z - blocks[j]) < best) {
          best = std::abs(z - blocks[j]);
          at = j;
        }
      }
      used[at] = true;
      EXPECT_LE(best, 1e-9) << "p=" << p << " d=" << d;
    }
  }
}

TEST(Embedded, PowerSumsEqualBlockPowerSums) {
  // With repeated interior blocks the eigenvalues are defective and only
  // accurate to a fractional power of round-off; the power sums
  // trace(A^k) = sum lambda^k fix the multiset without that loss.
  for (int p = 0; p <= 4; ++p) {
    for (int cells = 2; cells <= 4; ++cells) {
      const MeshSpec mesh{cells, 0.5, 0.5 + cells};
      const CorrectionStencil s = make_stencil(CorrectionMethod::rod_l2(), p, {0.5, -0.7, 1.0});
      const Matrix a = assemble_embedded(p, mesh, s, 0.0).system_matrix();
      const int b = p + 1;
      Matrix ak = Matrix::Identity(a.rows(), a.cols());
      Matrix bk = Matrix::Identity(b, b);
      Matrix ik = Matrix::Identity(b, b);
      for (int k = 1; k <= a.rows(); ++k) {
        ak = ak * a;
        bk = bk * a.topLeftCorner(b, b);
        ik = ik * a.block(b, b, b, b);
        const double lhs = ak.trace();
        const double rhs = bk.trace() + (cells - 1) * ik.trace();
        EXPECT_LE(std::abs(lhs - rhs), 1e-9 * std::max(1.0, ak.cwiseAbs().sum()))
            << "p=" << p << " cells=" << cells << " k=" << k;
      }
    }
  }
}

TEST(Embedded, RejectsMismatchedStencil) {
  const MeshSpec mesh{4, 0.0, 2.0};
  EXPECT_THROW(assemble_embedded(2, mesh, make_stencil(CorrectionMethod::rod_e(), 3, {0.0, 0.1, 0.5}), 0.0),
               ValidationError);
  EXPECT_THROW(assemble_embedded(2, mesh, make_stencil(CorrectionMethod::rod_e(), 2, {0.0, 0.1, 1.0}), 0.0),
               ValidationError);
  EXPECT_THROW(assemble_embedded(2, mesh, make_stencil(CorrectionMethod::rod_e(), 2, {0.1, 0.1, 0.5}), 0.0),
               ValidationError);
}

TEST(Embedded, SourceLoadIsProjectedIntegral) {
  const MeshSpec mesh{3, 0.0, 3.0};
  const CorrectionStencil s = make_stencil(CorrectionMethod::rod_e(), 2, {0.0, 0.0, 1.0});
  const DgOperator op = assemble_embedded(2, mesh, s, 0.0, [](double x) { return x * x; });
  for (int i = 0; i < 3; ++i) {
    for (int m = 0; m <= 2; ++m) {
      const double expected = 0.5 * oracle::integrate([&](double xi) {
        const double x = i + 0.5 + 0.5 * xi;
        return x * x * oracle::legendre(m, xi);
      });
      EXPECT_NEAR(op.load[i * 3 + m], expected, 1e-13);
    }
  }
}

TEST(Embedded, ManufacturedResidualDecaysUnderRefinement) {
  auto f = [](double x) { return 0.1 * std::sin(M_PI * x); };
  auto s = [](double x) { return 0.1 * M_PI * std::cos(M_PI * x); };
  for (int p = 1; p <= 3; ++p) {
    double prev = 0.0;
    for (int cells : {10, 20, 40, 80}) {
      const MeshSpec mesh{cells, 0.0, 2.0};
      const CorrectionStencil st = make_stencil(CorrectionMethod::rod_e(), p, {0.0, 0.0, mesh.dx()});
      const DgOperator op = assemble_embedded(p, mesh, st, f(0.0), s);
      const Vector u = project_function(f, p, mesh);
      const double r = op.rhs(u).cwiseAbs().maxCoeff();
      if (prev > 0.0) EXPECT_GT(std::log2(prev / r), p - 0.3) << "p=" << p << " cells=" << cells;
      prev = r;
    }
  }
}

TEST(Projection, ConstantAndLinear) {
  const MeshSpec mesh{2, 0.0, 2.0};
  const Vector c = project_function([](double) { return 2.5; }, 3, mesh);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(c[i * 4], 2.5, 1e-13);
    for (int k = 1; k < 4; ++k) EXPECT_NEAR(c[i * 4 + k], 0.0, 1e-13);
  }
  const Vector l = project_function([](double x) { return x; }, 1, mesh);
  EXPECT_NEAR(l[0], 0.5, 1e-14);
  EXPECT_NEAR(l[1], 0.5, 1e-14);
}

TEST(Projection, ErrorDecaysAtOrderPPlusOne) {
  auto f = [](double x) { return 0.1 * std::sin(M_PI * x); };
  for (int p = 0; p <= 4; ++p) {
    double prev = 0.0;
    for (int cells : {8, 16, 32}) {
      const MeshSpec mesh{cells, 0.0, 2.0};
      const double e = l2_error(project_function(f, p, mesh), p, mesh, f);
      if (prev > 0.0) EXPECT_NEAR(std::log2(prev / e), p + 1, 0.25) << "p=" << p;
      prev = e;
    }
  }
}

TEST(Projection, PolynomialsOfDegreePAreExact) {
  const MeshSpec mesh{5, -1.0, 1.5};
  auto f = [](double x) { return 1.0 - 2.0 * x + 0.5 * x * x * x; };
  const Vector u = project_function(f, 3, mesh);
  EXPECT_LE(l2_error(u, 3, mesh, f), 1e-14);
  for (double x : {-1.0, -0.33, 0.2, 1.1, 1.5}) {
    EXPECT_NEAR(evaluate_solution(u, 3, mesh, x), f(x), 1e-13);
  }
  EXPECT_THROW(l2_error(Vector::Zero(3), 3, mesh, f), ValidationError);
}

}  // namespace
}  // namespace ebdg
