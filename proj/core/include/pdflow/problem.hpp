#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include "pdflow/linalg.hpp"
#include "pdflow/plant.hpp"
#include "pdflow/signal.hpp"

namespace pdflow {

/// Controller state z = (u, lambda).
struct ControllerState {
  Vector u;
  Vector lambda;

  Vector stacked() const;
  static ControllerState split(const Vector& z, Eigen::Index m);
};

/// Time-varying costs phi_t(u) on inputs and psi_t(y) on outputs.
///
/// mu_u is the strong-convexity modulus of phi, ell_u / ell_y the gradient
/// Lipschitz constants. For callback costs these are declared by the caller
/// and can be spot-checked with verify_cost_constants. Hessians are optional;
/// when absent the saddle-point oracle differentiates the gradients
/// numerically.
struct CostModel {
  using Value = std::function<double(const Vector&, double)>;
  using Gradient = std::function<Vector(const Vector&, double)>;
  using Hessian = std::function<Matrix(const Vector&, double)>;

  Eigen::Index inputs = 0;
  Eigen::Index outputs = 0;
  Value input_cost;
  Gradient input_gradient;
  Hessian input_hessian;
  Value output_cost;
  Gradient output_gradient;
  Hessian output_hessian;
  double mu_u = 0.0;
  double ell_u = 0.0;
  double ell_y = 0.0;
  bool time_invariant = false;

  void validate() const;
};

/// phi_t(u) = 1/2 (u - r_u(t))^T Q_u (u - r_u(t)),
/// psi_t(y) = 1/2 (y - r_y(t))^T Q_y (y - r_y(t)) + c(t)^T y.
struct QuadraticCostSpec {
  Matrix Q_u;
  Signal r_u;
  Matrix Q_y;
  Signal r_y;
  Signal c;
};

CostModel quadratic_cost(const QuadraticCostSpec& spec);

/// Random-sample check of the declared mu_u, ell_u, ell_y inside the box
/// [-radius, radius] and t in [t0, t1]. Throws ConstantViolated.
void verify_cost_constants(const CostModel& cost, int samples, double radius, double t0,
                           double t1, std::uint64_t seed, double slack = 1e-9);

class InputSet {
 public:
  enum class Kind { Box, NonnegOrthant, Ball, FullSpace };

  static InputSet box(Vector lower, Vector upper);
  static InputSet nonneg(Eigen::Index dim);
  static InputSet ball(Vector center, double radius);
  static InputSet full(Eigen::Index dim);
  /// Parses "box" | "nonneg" | "ball" | "full"; anything else is
  /// UnsupportedSet. Box bounds / ball data must then be supplied.
  static Kind parse_kind(std::string_view name);

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

  Vector project(const Vector& v) const;
  /// An element of the generalized Jacobian of project() at v.
  Matrix projection_jacobian(const Vector& v) const;
  bool contains(const Vector& v, double tol = 0.0) const;
  double distance(const Vector& v) const;

 private:
  InputSet(Kind kind, Eigen::Index dim) : kind_(kind), dim_(dim) {}
  Kind kind_;
  Eigen::Index dim_;
  Vector lower_, upper_, center_;
  double radius_ = 0.0;
};

/// Projection onto the dual cone R^r_{>=0}.
Vector project_nonneg(const Vector& v);

enum class ConstraintKind { Inequality, Equality };

/// K_t y <= e_t (or == for the equality kind). K_bar / e_bar are uniform
/// bounds on ||K_t|| and ||e_t||; k_lo / k_hi bound the spectrum of
/// K_t G G^T K_t^T and are only meaningful for the equality kind.
struct OutputConstraint {
  ConstraintKind kind = ConstraintKind::Inequality;
  Eigen::Index rows = 0;
  Eigen::Index outputs = 0;
  std::function<Matrix(double)> K;
  Signal e;
  double K_bar = 0.0;
  double e_bar = 0.0;
  std::optional<double> k_lo;
  std::optional<double> k_hi;
  bool constant_K = true;

  static OutputConstraint none(Eigen::Index outputs);
  /// Constant K; e may vary in time. Bounds are taken as ||K|| and
  /// sup ||e_t|| (sampled on [0, horizon] for non-constant e).
  static OutputConstraint fixed(ConstraintKind kind, Matrix K, Signal e,
                                double horizon = 100.0);
  static OutputConstraint time_varying(ConstraintKind kind, Eigen::Index rows,
                                       Eigen::Index outputs, std::function<Matrix(double)> K,
                                       Signal e, double K_bar, double e_bar);

  /// Throws BoundViolated if a sampled ||K_t|| or ||e_t|| exceeds its
  /// declared bound.
  void check_bounds(double t0, double t1, int samples) const;
};

struct ModifiedGradients {
  Vector L_u;
  Vector L_lambda;
};

/// The time-varying regulation problem together with the plant's
/// steady-state map and the disturbance signal w_t.
class TimeVaryingProblem {
 public:
  TimeVaryingProblem(CostModel cost, OutputConstraint constraint, InputSet input_set, double nu,
                     SteadyStateMap map, Signal disturbance);

  const CostModel& cost() const { return cost_; }
  const OutputConstraint& constraint() const { return constraint_; }
  const InputSet& input_set() const { return input_set_; }
  const SteadyStateMap& map() const { return map_; }
  const Signal& disturbance() const { return disturbance_; }
  ConstraintKind kind() const { return constraint_.kind; }
  /// Regularization weight; zero for the equality kind.
  double nu() const { return nu_; }

  Eigen::Index inputs() const { return map_.G.cols(); }
  Eigen::Index outputs() const { return map_.G.rows(); }
  Eigen::Index multipliers() const { return constraint_.rows; }
  Eigen::Index disturbances() const { return map_.H.cols(); }

  /// True when costs, constraint and disturbance are all time-invariant.
  bool is_static() const;

  /// G u + H w_t.
  Vector steady_output(const Vector& u, double t) const;

  /// F_t(z) with the problem's regularization weight.
  Vector saddle_map(const ControllerState& z, double t) const;
  /// F_t(z) with an explicit weight (nu = 0 gives the exact Lagrangian).
  Vector saddle_map(const ControllerState& z, double t, double nu) const;
  /// Jacobian of F_t at z (numerical Hessians for callback costs).
  Matrix saddle_jacobian(const ControllerState& z, double t, double nu) const;

  /// L_u = grad phi(u) + G^T grad psi(y) + G^T K^T lambda,
  /// L_lambda = K y - e - nu lambda, with y a measured output.
  ModifiedGradients modified_gradients(const Vector& u, const Vector& y, const Vector& lambda,
                                       double t) const;

  /// Analytic constants of F_t: min{mu_u, nu} and
  /// sqrt(2) (K_bar + max{ell_u + ||G||^2 ell_y, nu}).
  double monotonicity_modulus() const;
  double lipschitz_bound() const;

  /// Projection onto U x R^r_{>=0} (inequality) or the whole space
  /// (equality kind).
  ControllerState project_feasible(const ControllerState& z) const;

 private:
  CostModel cost_;
  OutputConstraint constraint_;
  InputSet input_set_;
  double nu_;
  SteadyStateMap map_;
  Signal disturbance_;
};

struct SaddlePoint {
  Vector u;
  Vector lambda;
  Vector x;  ///< -A^{-1}(B u + E w_t); empty unless a plant was supplied
  double kkt_residual = 0.0;
  int iterations = 0;

  ControllerState z() const { return {u, lambda}; }
};

struct SaddleOptions {
  double tol = 1e-10;
  int max_iterations = 500;
  /// Solve the non-regularized problem (nu = 0 with dual projection).
  bool exact = false;
  std::optional<ControllerState> warm_start;
};

/// Unique saddle point of the (regularized) Lagrangian at time t, or the
/// KKT point for the equality kind. The returned kkt_residual is the
/// natural residual ||z - P(z - F_t(z))||. Throws NoConvergence or
/// Infeasible (equality kind with rank-deficient K G).
SaddlePoint solve_saddle_point(const TimeVaryingProblem& problem, double t,
                               const SaddleOptions& options = {});
SaddlePoint solve_saddle_point(const TimeVaryingProblem& problem, const LtiPlant& plant, double t,
                               const SaddleOptions& options = {});

/// ||z - P(z - step F_t(z))|| for any step > 0.
double fixed_point_residual(const TimeVaryingProblem& problem, const ControllerState& z, double t,
                            double step, double nu);

struct RegularizationErrorReport {
  double lhs = 0.0;  ///< mu_u ||u_nu - u*||^2 + nu/2 ||lambda_nu||^2
  double rhs = 0.0;  ///< nu/2 ||lambda*||^2
  bool pass = false;
  double input_gap = 0.0;        ///< ||u_nu - u*||
  double input_gap_bound = 0.0;  ///< sqrt(nu / (2 mu_u)) ||lambda*||
  bool gap_pass = false;
  SaddlePoint regularized;
  SaddlePoint exact;
};

/// Compares the regularized and exact saddle points (inequality kind only).
RegularizationErrorReport regularization_error_check(const TimeVaryingProblem& problem, double t,
                                                     double slack = 1e-8);

/// Max central-difference rate of the regularized saddle point t -> z*_t
/// over [t0, t1], sampled every grid_dt. Zero for static problems.
double estimate_saddle_rate(const TimeVaryingProblem& problem, double t0, double t1,
                            double grid_dt);

}  // namespace pdflow
