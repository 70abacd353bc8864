#pragma once

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pdflow/certificates.hpp"
#include "pdflow/controllers.hpp"
#include "pdflow/linalg.hpp"
#include "pdflow/plant.hpp"
#include "pdflow/problem.hpp"

namespace pdflow {

/// One classical Runge-Kutta step of ds/dt = f(t, s).
template <class Field>
Vector rk4_step(const Field& f, double t, const Vector& s, double h) {
  const Vector k1 = f(t, s);
  const Vector k2 = f(t + 0.5 * h, s + 0.5 * h * k1);
  const Vector k3 = f(t + 0.5 * h, s + 0.5 * h * k2);
  const Vector k4 = f(t + h, s + h * k3);
  return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step RK4 from t0 to t1; the last step is shortened to land on t1.
template <class Field>
Vector integrate_ode(const Field& f, Vector s, double t0, double t1, double dt) {
  const long steps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9));
  for (long k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    s = rk4_step(f, t, s, std::min(dt, t1 - t));
  }
  return s;
}

enum class ControllerKind { ProjectedPD, EqualityPD };

/// Certificate-derived data the log needs for its envelope and Lyapunov
/// columns. Build with diagnostics_for().
struct Diagnostics {
  EnvelopeCoefficients coefficients;
  double theta = 0.0;
  /// V = z~^T weight z~; 1/2 I for the projected controller, P_z otherwise.
  Matrix V_weight;
  Matrix P_x;
};

Diagnostics diagnostics_for(const CertifiedPlant& plant, const CertificateReport& report);
Diagnostics diagnostics_for(const CertifiedPlant& plant, const EqualityCertificate& report);

struct SimulationOptions {
  ControllerKind controller = ControllerKind::ProjectedPD;
  ControllerGains gains;
  double t0 = 0.0;
  double t1 = 10.0;
  double dt = 1e-3;
  int log_every = 10;
  /// Evaluate the saddle-point oracle on the log grid (err, V, W, U columns).
  bool track_oracle = true;
  double oracle_tol = 1e-10;
  std::optional<Diagnostics> diagnostics;
  /// Overrides for the ISS suprema. When absent, sup ||dz*/dt|| is the max
  /// central difference of the oracle on the log grid and sup ||dw/dt||
  /// comes from the disturbance signal.
  std::optional<double> sup_zstar_rate;
  std::optional<double> sup_w_rate;
};

struct LogRecord {
  double t = 0.0;
  Vector x, u, lambda, y, w;
  Vector x_star, u_star, lambda_star;
  double err = 0.0;       ///< ||xi - xi*||
  double envelope = 0.0;  ///< NaN without diagnostics
  double V = 0.0, W = 0.0, U = 0.0;
};

struct TrajectoryLog {
  std::vector<LogRecord> records;
  double log_dt = 0.0;
  Eigen::Index n = 0, m = 0, r = 0, p = 0;
  double sup_zstar_rate = 0.0;
  double sup_w_rate = 0.0;
  double envelope_floor = 0.0;
  /// Time u first entered U (NaN if never) and the largest distance from
  /// U x R^r_{>=0} observed at any integration step afterwards.
  double entry_time = 0.0;
  double max_exit_distance = 0.0;
};

/// RK4 on eps dx/dt = A x + B u + E w, dz/dt = controller field with
/// y = C x + D w. Throws StepTooLarge (dt > eps / 10), NonFiniteState, and
/// propagates oracle errors.
TrajectoryLog integrate(const CertifiedPlant& plant, const TimeVaryingProblem& problem,
                        const Vector& x0, const ControllerState& z0,
                        const SimulationOptions& options);

/// Closed-loop error ||(x - x*, u - u*, lambda - lambda*)|| at one instant.
double tracking_error(const LtiPlant& plant, const SaddlePoint& star, const Vector& x,
                      const ControllerState& z, const Vector& w);

struct TrackingReport {
  double max_violation = 0.0;  ///< max_t (err - envelope); <= 0 when sound
  double asymptotic_error = 0.0;
  double decay_slope = 0.0;  ///< least-squares slope of log err over the transient
  bool empty_fit = false;
  double initial_error = 0.0;
  double final_error = 0.0;
  double envelope_floor = 0.0;
};

TrackingReport tracking_report(const TrajectoryLog& log);

struct LyapunovReport {
  std::vector<double> V, W, U;
  std::vector<bool> flagged;  ///< per consecutive pair: U grew outside the ball
  int flagged_count = 0;
  double ball_radius = 0.0;
};

/// Flags each pair (k, k+1) where U increases while err_k exceeds the
/// residual-ball radius max(envelope floor, noise_floor).
LyapunovReport lyapunov_diagnostics(const TrajectoryLog& log, double noise_floor = 1e-8);

/// CSV with a "# column: meaning" comment block and 17 significant digits.
void write_csv(const TrajectoryLog& log, std::ostream& out);
void write_csv(const TrajectoryLog& log, const std::string& path);

// ---------------------------------------------------------------------------
// Reduced (eps = 0) controller dynamics, y = G u + H w_t.

enum class ReducedField { Lipschitz, Discontinuous };

struct ReducedTrajectory {
  std::vector<double> t;
  std::vector<ControllerState> z;
  std::vector<ControllerState> zdot;  ///< field value at each sample
};

/// Lipschitz field: RK4. Discontinuous field: forward Euler followed by a
/// projection onto the feasible set (the field itself is only piecewise
/// continuous, so higher-order stages would straddle the switching surface).
ReducedTrajectory integrate_reduced(const TimeVaryingProblem& problem, const ControllerState& z0,
                                    double eta, double t0, double t1, double dt,
                                    ReducedField field);

}  // namespace pdflow
