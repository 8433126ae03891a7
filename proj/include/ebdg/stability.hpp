#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ebdg/corrections.hpp"
#include "ebdg/types.hpp"

namespace ebdg {

enum class Integrator { kExplicit, kImplicit };

std::string to_string(Integrator integrator);
Integrator parse_integrator(const std::string& text);

/// Stability tolerance on amplification factors and spectral radii.
inline constexpr double kAmplificationTolerance = 1e-8;

/// All eigenvalues of a dense real matrix (n <= 64), sorted by (real, imag).
ComplexList eigenvalues_dense(const Matrix& a);

/// |sum_{k=0}^{order} mu^k / k!|, the per-mode factor of an order-`order`
/// DeC (truncated Taylor) step.
double amplification(Complex mu, int order);

struct AnalysisOptions {
  int cells = 2;
};

/// M^{-1} K for `cells` cells of unit length with periodic coupling.
Matrix periodic_system_matrix(int p, int cells = 2);

/// M^{-1} K for `cells` unit cells with the embedded correction at signed
/// distance d from the left face (homogeneous datum).
Matrix embedded_system_matrix(int p, const CorrectionMethod& method, double d, int cells = 2);

/// Largest normalized step c = dt/dx for which the periodic two-cell
/// operator is stable under the order-(p+1) explicit update. Memoized.
double periodic_cfl_max(int p);

struct StabilityVerdict {
  bool stable = false;
  double max_amplification = 0.0;
  /// Explicit: eigenvalue of M^{-1}K with the largest amplification.
  /// Implicit: eigenvalue of the update matrix with the largest modulus.
  Complex worst_eigenvalue;
  double max_re_lambda = 0.0;
  double d = 0.0;
  double cfl = 0.0;
  CorrectionKind kind = CorrectionKind::kRodE;
  Integrator integrator = Integrator::kExplicit;
  int degree = 0;
};

/// Classifies one (d, normalized CFL) point; dt = cfl * periodic_cfl_max(p).
StabilityVerdict classify(int p, const CorrectionMethod& method, Integrator integrator, double d,
                          double cfl, const AnalysisOptions& options = {});

struct GridSpec {
  double d_min = -1.0;
  double d_max = 1.0;
  double d_step = 0.01;
  double cfl_hi = 1.0;
  int cfl_count = 100;  // CFL = k * cfl_hi / cfl_count, k = 1..cfl_count

  std::vector<double> d_values() const;
  std::vector<double> cfl_values() const;
  void validate() const;
};

struct StabilityMap {
  int degree = 0;
  CorrectionMethod method;
  Integrator integrator = Integrator::kExplicit;
  GridSpec grid;
  std::vector<double> d_values;
  std::vector<double> cfl_values;
  /// Row-major: d outer, CFL inner.
  std::vector<StabilityVerdict> verdicts;

  const StabilityVerdict& at(std::size_t d_index, std::size_t cfl_index) const {
    return verdicts[d_index * cfl_values.size() + cfl_index];
  }
};

/// `threads` <= 0 uses all hardware threads. Output order is independent of
/// the thread count.
StabilityMap stability_map(int p, const CorrectionMethod& method, Integrator integrator,
                           const GridSpec& grid, int threads = 0,
                           const AnalysisOptions& options = {});

/// Closed-form P1 boundary-block eigenvalues for ROD-E and ROD-L2 (unit cell).
std::pair<Complex, Complex> p1_rod_eigs_analytic(CorrectionKind kind, double d);

/// max Re(lambda) of the embedded M^{-1} K.
double semidiscrete_max_real(int p, const CorrectionMethod& method, double d,
                             const AnalysisOptions& options = {});

/// Root in d of semidiscrete_max_real on [lo, hi] by bisection; the sign must
/// change over the bracket.
double semidiscrete_threshold(int p, const CorrectionMethod& method, double lo, double hi,
                              double tolerance = 1e-9);

/// Smallest normalized CFL in [lo, hi] above which the implicit scheme is
/// stable, by bisection (unstable at lo, stable at hi required).
double implicit_cfl_threshold(int p, const CorrectionMethod& method, double d, double lo,
                              double hi, double tolerance = 1e-6,
                              const AnalysisOptions& options = {});

/// CSV: p,kind,integrator,d,cfl,stable,max_amp,max_re_lambda
void write_map_csv(std::ostream& out, const StabilityMap& map);
/// Two-color heatmap: green stable, red unstable; d vertical, CFL horizontal.
void write_map_svg(std::ostream& out, const StabilityMap& map);

}  // namespace ebdg
