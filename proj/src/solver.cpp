#include "ebdg/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include "ebdg/basis.hpp"
#include "ebdg/errors.hpp"
#include "ebdg/io.hpp"

namespace ebdg {

double manufactured_solution(double x) { return 0.1 * std::sin(std::numbers::pi * x); }

double manufactured_source(double x) {
  return 0.1 * std::numbers::pi * std::cos(std::numbers::pi * x);
}

void RunConfig::validate() const {
  require_degree(degree);
  if (cells < 2) throw ValidationError("run: need at least 2 cells");
  if (!(std::abs(d) <= 1.0)) throw ValidationError("run: d must lie in [-1, 1]");
  if (!(cfl > 0.0) || !std::isfinite(cfl)) throw ValidationError("run: CFL must be positive");
  if (!(steady_tolerance > 0.0)) throw ValidationError("run: steady tolerance must be positive");
  if (max_steps < 0) throw ValidationError("run: max steps must be non-negative");
  if (!(divergence_threshold > 0.0)) throw ValidationError("run: bad divergence threshold");
  if (!(right > left)) throw ValidationError("run: empty domain");
}

long RunConfig::effective_max_steps() const {
  if (max_steps > 0) return max_steps;
  return integrator == Integrator::kExplicit ? 1000000 : 100000;
}

double RunConfig::effective_min_time() const { return min_time < 0.0 ? right - left : min_time; }

double RunConfig::time_step() const { return cfl * periodic_cfl_max(degree) * mesh().dx(); }

Vector step_explicit(const DgOperator& op, const Vector& u, double dt, int order) {
  if (order < 1) throw ValidationError("step_explicit: order must be >= 1");
  Vector w = op.rhs(u);
  Vector out = u + dt * w;
  double factor = dt;
  for (int k = 2; k <= order; ++k) {
    w = Vector(op.stiffness * w).cwiseQuotient(op.mass);
    factor *= dt / k;
    out += factor * w;
  }
  return out;
}

ImplicitEulerStepper::ImplicitEulerStepper(const DgOperator& op, double dt)
    : op_(&op), dt_(dt) {
  if (!(dt > 0.0)) throw ValidationError("implicit Euler: dt must be positive");
  system_ = op.dense_mass() - dt * op.dense_stiffness();
  lu_.compute(system_);
  if (!std::isfinite(lu_.rcond()) || lu_.rcond() < 1e-14) {
    throw NumericalError("implicit Euler: system matrix is singular to working precision");
  }
}

Vector ImplicitEulerStepper::step(const Vector& u) const {
  // Increment form: (M - dt K) delta = dt (K u + load). Same update as
  // (M - dt K) u+ = M u + dt load, but the solve error scales with the
  // residual, so the marching increment can fall to round-off near steady state.
  const Vector rhs = dt_ * (Vector(op_->stiffness * u) + op_->load);
  const Vector delta = lu_.solve(rhs);
  const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  const double residual = (system_ * delta - rhs).lpNorm<Eigen::Infinity>();
  if (residual > 1e-11 * scale) {
    throw NumericalError("implicit Euler: solve residual " + format_double(residual) +
                         " exceeds tolerance");
  }
  return u + delta;
}

Vector step_implicit_euler(const DgOperator& op, const Vector& u, double dt) {
  return ImplicitEulerStepper(op, dt).step(u);
}

RunResult run_manufactured(const RunConfig& config) {
  config.validate();
  const MeshSpec mesh = config.mesh();
  const int p = config.degree;
  const double dx = mesh.dx();
  const BoundaryGeometry geometry{mesh.left, config.d * dx, dx};
  const CorrectionStencil stencil = make_stencil(config.method, p, geometry);
  const double u_d = manufactured_solution(geometry.real_point());
  const DgOperator op = assemble_embedded(p, mesh, stencil, u_d, manufactured_source);

  const double dt = config.time_step();
  const long max_steps = config.effective_max_steps();
  const double min_time = config.effective_min_time();

  std::unique_ptr<ImplicitEulerStepper> implicit;
  if (config.integrator == Integrator::kImplicit) {
    implicit = std::make_unique<ImplicitEulerStepper>(op, dt);
  }

  Vector u = project_function(manufactured_solution, p, mesh);
  RunResult result;
  for (long n = 1; n <= max_steps; ++n) {
    Vector next = implicit ? implicit->step(u) : step_explicit(op, u, dt, p + 1);
    const double increment = (next - u).lpNorm<Eigen::Infinity>();
    u.swap(next);
    const double norm = u.lpNorm<Eigen::Infinity>();
    result.steps = n;
    result.final_time = n * dt;
    if (!std::isfinite(norm) || norm > config.divergence_threshold) {
      throw UnstableRunError("run diverged after " + std::to_string(n) + " steps", n, norm);
    }
    if (increment <= config.steady_tolerance * (1.0 + norm) && result.final_time >= min_time) {
      result.converged = true;
      break;
    }
  }
  result.residual = op.rhs(u).lpNorm<Eigen::Infinity>();
  result.l2_error = l2_error(u, p, mesh, manufactured_solution);
  return result;
}

ConvergenceReport convergence_study(const RunConfig& base, const std::vector<int>& meshes,
                                    int threads) {
  if (meshes.empty()) throw ValidationError("convergence study: no meshes");
  for (std::size_t i = 1; i < meshes.size(); ++i) {
    if (meshes[i] != 2 * meshes[i - 1]) {
      throw ValidationError("convergence study: meshes must double");
    }
  }
  RunConfig first = base;
  first.cells = meshes.front();
  first.validate();
  periodic_cfl_max(base.degree);

  ConvergenceReport report;
  report.base = base;
  report.rows.resize(meshes.size());

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= meshes.size()) return;
      ConvergenceRow& row = report.rows[i];
      row.cells = meshes[i];
      RunConfig config = base;
      config.cells = meshes[i];
      try {
        const RunResult r = run_manufactured(config);
        row.l2_error = r.l2_error;
        row.steps = r.steps;
        row.residual = r.residual;
        row.converged = r.converged;
      } catch (const UnstableRunError& e) {
        row.unstable = true;
        row.steps = e.steps();
        row.l2_error = std::numeric_limits<double>::quiet_NaN();
        row.residual = std::numeric_limits<double>::quiet_NaN();
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  int n = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n = std::clamp<int>(n, 1, static_cast<int>(meshes.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    auto& row = report.rows[i];
    if (i == 0 || row.unstable || report.rows[i - 1].unstable) {
      row.eoa = nan;
    } else {
      row.eoa = std::log2(report.rows[i - 1].l2_error / row.l2_error);
    }
  }
  return report;
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
  out << "p,kind,integrator,d,cfl,Ne,l2_error,eoa,steps,residual\n";
  const RunConfig& b = report.base;
  for (const ConvergenceRow& row : report.rows) {
    out << b.degree << ',' << to_string(b.method.kind) << ',' << to_string(b.integrator) << ','
        << format_double(b.d) << ',' << format_double(b.cfl) << ',' << row.cells << ','
        << format_double(row.l2_error) << ',' << format_double(row.eoa) << ',' << row.steps
        << ',' << format_double(row.residual) << '\n';
  }
}

}  // namespace ebdg
