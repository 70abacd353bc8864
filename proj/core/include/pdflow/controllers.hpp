#pragma once

#include <vector>

#include "pdflow/linalg.hpp"
#include "pdflow/problem.hpp"

namespace pdflow {

struct ControllerGains {
  double eps = 1.0;         ///< plant time-scale gain
  double eta = 0.0;         ///< projected controller gain
  double eta_u = 0.0;       ///< equality track, primal
  double eta_lambda = 0.0;  ///< equality track, dual
};

/// du/dt = P_U(u - eta L_u) - u,  dlambda/dt = P_C(lambda + eta L_lambda) - lambda.
ControllerState projected_pd_field(const TimeVaryingProblem& problem, const ControllerState& z,
                                   const Vector& y, double t, double eta);

/// Decreasing step sequence 1e-2, 1e-3, ..., 1e-8.
std::vector<double> default_delta_sequence();

/// One-sided limit lim_{delta -> 0+} (P(z + delta D) - z) / delta with drift
/// D = eta (-L_u, L_lambda). Diagnostic only: this is the classical
/// discontinuous projected dynamics the Lipschitz field is compared against.
/// Throws LimitNotSettled when the last two quotients differ by more than
/// 1e-4.
ControllerState discontinuous_projected_field(const TimeVaryingProblem& problem,
                                              const ControllerState& z, const Vector& y, double t,
                                              double eta,
                                              const std::vector<double>& delta_seq =
                                                  default_delta_sequence());

/// du/dt = -eta_u L_u,  dlambda/dt = eta_lambda (K y - e). Equality kind only.
ControllerState equality_pd_field(const TimeVaryingProblem& problem, const ControllerState& z,
                                  const Vector& y, double t, double eta_u, double eta_lambda);

// ---------------------------------------------------------------------------
// Ramp-metering baselines. These work on link indices; the traffic module
// resolves link ids.

struct AlineaRamp {
  std::vector<Eigen::Index> downstream;
};

struct AlineaLaw {
  std::vector<AlineaRamp> ramps;
  Vector gains;      ///< K_j per link
  Vector setpoints;  ///< x_hat_j per link
};

/// du_i/dt = sum_{j in i+} K_j (x_hat_j - x_j). Throws UnknownLink when a
/// downstream index is out of range.
Vector alinea_field(const AlineaLaw& law, const Vector& densities);

/// Continuous-time linear prediction model dx/dt = A x + B u.
struct MpcModel {
  Matrix A;
  Matrix B;
};

/// Stage cost (u - u_ref)^T Q_u (u - u_ref) - c^T x + delta ||x||^2 with
/// x <= ceilings and u >= 0.
struct MpcObjective {
  Matrix Q_u;
  Vector u_ref;
  Vector throughput_weights;  ///< c
  double delta = 0.0;
  Vector ceilings;
};

struct MpcOptions {
  double horizon = 20.0;  ///< T_p
  double replan = 5.0;    ///< T_s
  double dt = 1.0;
  double tol = 1e-8;
  long max_iterations = 100000;
  double soft_penalty = 1e4;
};

struct MpcPlan {
  std::vector<Vector> inputs;  ///< piecewise-constant over [k dt, (k+1) dt), k < T_s/dt
  bool softened = false;       ///< density constraints were infeasible at x_hat
  long iterations = 0;
  double residual = 0.0;
};

/// Forward-Euler discretization, condensed QP over the horizon. Throws
/// QPNoConvergence; infeasible horizons are softened with a quadratic
/// penalty and reported via MpcPlan::softened.
MpcPlan mpc_policy(const MpcModel& model, const MpcObjective& objective, const Vector& x_hat,
                   const MpcOptions& options);

struct QpResult {
  Vector z;
  Vector multipliers;  ///< one per row of A
  long iterations = 0;
  /// Largest of the scaled stationarity, feasibility and complementarity
  /// residuals.
  double residual = 0.0;
  bool converged = false;
};

/// Convex QP  min 1/2 z^T H z + f^T z  s.t.  A z <= b  with H symmetric
/// positive definite, by a Mehrotra predictor-corrector interior-point
/// method on the dense normal equations.
QpResult solve_inequality_qp(const Matrix& H, const Vector& f, const Matrix& A, const Vector& b,
                             double tol, long max_iterations);

}  // namespace pdflow
