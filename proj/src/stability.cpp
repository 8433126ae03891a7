#include "ebdg/stability.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "ebdg/basis.hpp"
#include "ebdg/dg_core.hpp"
#include "ebdg/errors.hpp"
#include "ebdg/io.hpp"

namespace ebdg {

std::string to_string(Integrator integrator) {
  return integrator == Integrator::kExplicit ? "explicit" : "implicit";
}

Integrator parse_integrator(const std::string& text) {
  if (text == "explicit") return Integrator::kExplicit;
  if (text == "implicit") return Integrator::kImplicit;
  throw ValidationError("unknown integrator '" + text + "' (expected explicit or implicit)");
}

ComplexList eigenvalues_dense(const Matrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("eigenvalues_dense: matrix is not square");
  if (a.rows() > 64) throw ValidationError("eigenvalues_dense: matrix larger than 64x64");
  if (a.rows() == 0) return {};
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigenvalues_dense: QR iteration did not converge");
  }
  const auto& ev = solver.eigenvalues();
  ComplexList out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), [](const Complex& x, const Complex& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  return out;
}

double amplification(Complex mu, int order) {
  if (order < 0) throw ValidationError("amplification: negative order");
  // Horner form of the truncated exponential.
  Complex acc = 1.0;
  for (int k = order; k >= 1; --k) acc = 1.0 + acc * mu / static_cast<double>(k);
  return std::abs(acc);
}

namespace {

MeshSpec unit_mesh(int cells) {
  if (cells < 2) throw ValidationError("analysis needs at least 2 cells");
  MeshSpec mesh;
  mesh.cells = cells;
  mesh.left = 0.5;
  mesh.right = 0.5 + cells;
  return mesh;
}

double max_explicit_amplification(const ComplexList& eigs, double dt, int order,
                                  Complex* worst = nullptr) {
  double best = 0.0;
  for (const Complex& lambda : eigs) {
    const double g = amplification(lambda * dt, order);
    if (g > best) {
      best = g;
      if (worst) *worst = lambda;
    }
  }
  return best;
}

double max_real(const ComplexList& eigs) {
  double m = -std::numeric_limits<double>::infinity();
  for (const Complex& l : eigs) m = std::max(m, l.real());
  return m;
}

double compute_periodic_cfl_max(int p) {
  const ComplexList eigs = eigenvalues_dense(periodic_system_matrix(p, 2));
  const int order = p + 1;
  auto stable = [&](double c) {
    return max_explicit_amplification(eigs, c, order) <= 1.0 + kAmplificationTolerance;
  };
  double lo = 1e-4;
  double hi = 2.0;
  if (!stable(lo) || stable(hi)) {
    throw NumericalError("periodic_cfl_max: bisection bracket does not straddle the limit");
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (stable(mid) ? lo : hi) = mid;
  }
  if (!stable(lo - 1e-5) || stable(lo + 1e-5)) {
    throw NumericalError("periodic_cfl_max: stability is not monotone near the limit");
  }
  return lo;
}

}  // namespace

Matrix periodic_system_matrix(int p, int cells) {
  return assemble_periodic(p, unit_mesh(cells)).system_matrix();
}

Matrix embedded_system_matrix(int p, const CorrectionMethod& method, double d, int cells) {
  const MeshSpec mesh = unit_mesh(cells);
  const CorrectionStencil stencil = make_stencil(method, p, {mesh.left, d, mesh.dx()});
  return assemble_embedded(p, mesh, stencil, 0.0).system_matrix();
}

double periodic_cfl_max(int p) {
  require_degree(p);
  static std::mutex mutex;
  static std::array<double, kMaxDegree + 1> cache{};
  std::lock_guard<std::mutex> lock(mutex);
  if (cache[p] == 0.0) cache[p] = compute_periodic_cfl_max(p);
  return cache[p];
}

namespace {

StabilityVerdict classify_spectrum(int p, const Matrix& a, const ComplexList& eigs,
                                   Integrator integrator, double dt) {
  StabilityVerdict v;
  v.degree = p;
  v.integrator = integrator;
  v.max_re_lambda = max_real(eigs);
  if (integrator == Integrator::kExplicit) {
    v.max_amplification = max_explicit_amplification(eigs, dt, p + 1, &v.worst_eigenvalue);
  } else {
    const Matrix identity = Matrix::Identity(a.rows(), a.cols());
    const Matrix update = Eigen::PartialPivLU<Matrix>(identity - dt * a).inverse();
    double rho = 0.0;
    for (const Complex& z : eigenvalues_dense(update)) {
      if (std::abs(z) > rho) {
        rho = std::abs(z);
        v.worst_eigenvalue = z;
      }
    }
    v.max_amplification = rho;
  }
  v.stable = v.max_amplification <= 1.0 + kAmplificationTolerance;
  return v;
}

}  // namespace

StabilityVerdict classify(int p, const CorrectionMethod& method, Integrator integrator, double d,
                          double cfl, const AnalysisOptions& options) {
  if (!(cfl > 0.0)) throw ValidationError("classify: CFL must be positive");
  const Matrix a = embedded_system_matrix(p, method, d, options.cells);
  const ComplexList eigs = eigenvalues_dense(a);
  StabilityVerdict v = classify_spectrum(p, a, eigs, integrator, cfl * periodic_cfl_max(p));
  v.d = d;
  v.cfl = cfl;
  v.kind = method.kind;
  return v;
}

std::vector<double> GridSpec::d_values() const {
  validate();
  const int count = static_cast<int>(std::llround((d_max - d_min) / d_step)) + 1;
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = d_min + i * d_step;
  return out;
}

std::vector<double> GridSpec::cfl_values() const {
  validate();
  std::vector<double> out(cfl_count);
  for (int k = 1; k <= cfl_count; ++k) out[k - 1] = cfl_hi * k / cfl_count;
  return out;
}

void GridSpec::validate() const {
  if (!(d_step > 0.0) || !(d_max >= d_min) || d_min < -1.0 - 1e-12 || d_max > 1.0 + 1e-12) {
    throw ValidationError("grid: need -1 <= d_min <= d_max <= 1 and d_step > 0");
  }
  if (!(cfl_hi > 0.0) || cfl_count < 1) {
    throw ValidationError("grid: need cfl_hi > 0 and at least one CFL column");
  }
}

StabilityMap stability_map(int p, const CorrectionMethod& method, Integrator integrator,
                           const GridSpec& grid, int threads, const AnalysisOptions& options) {
  StabilityMap map;
  map.degree = p;
  map.method = method;
  map.integrator = integrator;
  map.grid = grid;
  map.d_values = grid.d_values();
  map.cfl_values = grid.cfl_values();
  map.verdicts.resize(map.d_values.size() * map.cfl_values.size());

  const double cfl_max = periodic_cfl_max(p);  // warm the cache before fanning out
  std::atomic<std::size_t> next_row{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next_row.fetch_add(1);
      if (i >= map.d_values.size()) return;
      try {
        const double d = map.d_values[i];
        const Matrix a = embedded_system_matrix(p, method, d, options.cells);
        const ComplexList eigs = eigenvalues_dense(a);
        for (std::size_t j = 0; j < map.cfl_values.size(); ++j) {
          StabilityVerdict v =
              classify_spectrum(p, a, eigs, integrator, map.cfl_values[j] * cfl_max);
          v.d = d;
          v.cfl = map.cfl_values[j];
          v.kind = method.kind;
          map.verdicts[i * map.cfl_values.size() + j] = v;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  int n = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n = std::clamp<int>(n, 1, static_cast<int>(map.d_values.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return map;
}

std::pair<Complex, Complex> p1_rod_eigs_analytic(CorrectionKind kind, double d) {
  const double d2 = d * d;
  const double d3 = d2 * d;
  const double d4 = d2 * d2;
  Complex b, radicand;
  double denom = 0.0;
  switch (kind) {
    case CorrectionKind::kRodE:
      b = -3.0 * d2 + 5.0 * d - 2.0;
      radicand = 9.0 * d4 - 18.0 * d3 + 13.0 * d2 - 2.0 * d - 2.0;
      denom = 2.0 * d2 - 2.0 * d + 1.0;
      break;
    case CorrectionKind::kRodL2:
      b = -9.0 * d2 + 12.0 * d - 4.0;
      radicand = 81.0 * d4 - 108.0 * d3 + 36.0 * d2 + 12.0 * d - 8.0;
      denom = 2.0 * (3.0 * d2 - 3.0 * d + 1.0);
      break;
    default:
      throw ValidationError("p1_rod_eigs_analytic: only rod-e and rod-l2 have closed forms");
  }
  const Complex root = std::sqrt(radicand);
  return {(b + root) / denom, (b - root) / denom};
}

double semidiscrete_max_real(int p, const CorrectionMethod& method, double d,
                             const AnalysisOptions& options) {
  return max_real(eigenvalues_dense(embedded_system_matrix(p, method, d, options.cells)));
}

double semidiscrete_threshold(int p, const CorrectionMethod& method, double lo, double hi,
                              double tolerance) {
  double f_lo = semidiscrete_max_real(p, method, lo);
  const double f_hi = semidiscrete_max_real(p, method, hi);
  if ((f_lo < 0.0) == (f_hi < 0.0)) {
    throw ValidationError("semidiscrete_threshold: no sign change over the bracket");
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = semidiscrete_max_real(p, method, mid);
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double implicit_cfl_threshold(int p, const CorrectionMethod& method, double d, double lo,
                              double hi, double tolerance, const AnalysisOptions& options) {
  auto stable = [&](double c) {
    return classify(p, method, Integrator::kImplicit, d, c, options).stable;
  };
  if (stable(lo) || !stable(hi)) {
    throw ValidationError("implicit_cfl_threshold: need unstable at lo and stable at hi");
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (stable(mid) ? hi : lo) = mid;
  }
  return hi;
}

void write_map_csv(std::ostream& out, const StabilityMap& map) {
  out << "p,kind,integrator,d,cfl,stable,max_amp,max_re_lambda\n";
  const std::string kind = to_string(map.method.kind);
  const std::string integrator = to_string(map.integrator);
  for (const StabilityVerdict& v : map.verdicts) {
    out << map.degree << ',' << kind << ',' << integrator << ',' << format_double(v.d) << ','
        << format_double(v.cfl) << ',' << (v.stable ? 1 : 0) << ','
        << format_double(v.max_amplification) << ',' << format_double(v.max_re_lambda) << '\n';
  }
}

void write_map_svg(std::ostream& out, const StabilityMap& map) {
  constexpr int kCell = 4;
  constexpr int kMarginLeft = 60;
  constexpr int kMarginBottom = 40;
  constexpr int kMarginTop = 30;
  const int cols = static_cast<int>(map.cfl_values.size());
  const int rows = static_cast<int>(map.d_values.size());
  const int plot_w = cols * kCell;
  const int plot_h = rows * kCell;
  const int width = kMarginLeft + plot_w + 20;
  const int height = kMarginTop + plot_h + kMarginBottom;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<text x=\"" << kMarginLeft << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
      << "P" << map.degree << ' ' << to_string(map.method.kind) << ' '
      << to_string(map.integrator) << "</text>\n";
  // Largest d at the top.
  for (int i = 0; i < rows; ++i) {
    const int y = kMarginTop + (rows - 1 - i) * kCell;
    for (int j = 0; j < cols; ++j) {
      const bool ok = map.at(i, j).stable;
      out << "<rect x=\"" << kMarginLeft + j * kCell << "\" y=\"" << y << "\" width=\"" << kCell
          << "\" height=\"" << kCell << "\" fill=\"" << (ok ? "#2ca02c" : "#d62728") << "\"/>\n";
    }
  }
  const int axis_y = kMarginTop + plot_h;
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << axis_y + 30
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">CFL</text>\n";
  out << "<text x=\"" << kMarginLeft << "\" y=\"" << axis_y + 15
      << "\" font-family=\"sans-serif\" font-size=\"10\">0</text>\n";
  out << "<text x=\"" << kMarginLeft + plot_w << "\" y=\"" << axis_y + 15
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">"
      << format_double(map.grid.cfl_hi) << "</text>\n";
  out << "<text x=\"15\" y=\"" << kMarginTop + plot_h / 2
      << "\" font-family=\"sans-serif\" font-size=\"12\">d</text>\n";
  out << "<text x=\"" << kMarginLeft - 5 << "\" y=\"" << kMarginTop + 10
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">"
      << format_double(map.d_values.back()) << "</text>\n";
  out << "<text x=\"" << kMarginLeft - 5 << "\" y=\"" << axis_y
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">"
      << format_double(map.d_values.front()) << "</text>\n";
  out << "</svg>\n";
}

}  // namespace ebdg
