#pragma once

#include <Eigen/LU>
#include <iosfwd>
#include <string>
#include <vector>

#include "ebdg/corrections.hpp"
#include "ebdg/dg_core.hpp"
#include "ebdg/stability.hpp"

namespace ebdg {

/// u_ex(x) = 0.1 sin(pi x), stationary for u_t + u_x = s.
double manufactured_solution(double x);
/// s(x) = 0.1 pi cos(pi x).
double manufactured_source(double x);

struct RunConfig {
  int degree = 1;
  CorrectionMethod method;
  Integrator integrator = Integrator::kExplicit;
  int cells = 20;
  double d = -1.0;  // in units of dx
  double cfl = 1.0;  // normalized by periodic_cfl_max(degree)
  /// Stop once max|u^{n+1} - u^n| <= steady_tolerance * (1 + max|u|) ...
  double steady_tolerance = 1e-15;
  /// ... and at least this much time has elapsed (< 0: one domain transit).
  double min_time = -1.0;
  /// 0 picks 10^6 (explicit) or 10^5 (implicit).
  long max_steps = 0;
  double divergence_threshold = 1e6;
  double left = 0.0;
  double right = 2.0;

  void validate() const;
  long effective_max_steps() const;
  double effective_min_time() const;
  MeshSpec mesh() const { return {cells, left, right}; }
  /// dt = cfl * periodic_cfl_max(degree) * dx
  double time_step() const;
};

struct RunResult {
  double l2_error = 0.0;
  long steps = 0;
  /// max|M^{-1}(K u + load)| at the final state.
  double residual = 0.0;
  double final_time = 0.0;
  /// False when the step budget ran out before the steady criterion held.
  bool converged = false;
};

/// u + sum_{k=1}^{order} dt^k/k! w_k, w_1 = A u + b, w_k = A w_{k-1}.
Vector step_explicit(const DgOperator& op, const Vector& u, double dt, int order);

/// Implicit Euler with (M - dt K) factored once.
class ImplicitEulerStepper {
 public:
  ImplicitEulerStepper(const DgOperator& op, double dt);
  Vector step(const Vector& u) const;
  double time_step() const { return dt_; }

 private:
  const DgOperator* op_;
  double dt_;
  Matrix system_;
  Eigen::PartialPivLU<Matrix> lu_;
};

/// One implicit Euler step; factors on every call.
Vector step_implicit_euler(const DgOperator& op, const Vector& u, double dt);

/// Marches the manufactured problem to its discrete steady state. Throws
/// UnstableRunError when max|u| exceeds the divergence threshold.
RunResult run_manufactured(const RunConfig& config);

struct ConvergenceRow {
  int cells = 0;
  double l2_error = 0.0;
  double eoa = 0.0;  // NaN on the first mesh or next to an unstable row
  long steps = 0;
  double residual = 0.0;
  bool unstable = false;
  bool converged = false;
};

struct ConvergenceReport {
  RunConfig base;
  std::vector<ConvergenceRow> rows;
};

/// Runs each mesh (cells must double), concurrently when threads != 1.
/// Unstable runs are reported per row rather than thrown.
ConvergenceReport convergence_study(const RunConfig& base, const std::vector<int>& meshes,
                                    int threads = 0);

/// CSV: p,kind,integrator,d,cfl,Ne,l2_error,eoa,steps,residual
void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);

}  // namespace ebdg
