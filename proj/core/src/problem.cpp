#include "pdflow/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdflow/error.hpp"
#include "pdflow/random.hpp"

namespace pdflow {

Vector ControllerState::stacked() const {
  Vector z(u.size() + lambda.size());
  z << u, lambda;
  return z;
}

ControllerState ControllerState::split(const Vector& z, Eigen::Index m) {
  return {z.head(m), z.tail(z.size() - m)};
}

// ---------------------------------------------------------------------------
// Costs

void CostModel::validate() const {
  if (!input_gradient || !output_gradient)
    throw Error(ErrorCode::InvalidArgument, "cost gradients must be provided");
  if (!(mu_u > 0.0))
    throw Error(ErrorCode::InvalidArgument, "input cost must be strongly convex (mu_u > 0)");
  if (ell_u < mu_u) throw Error(ErrorCode::InvalidArgument, "ell_u must be >= mu_u");
  if (ell_y < 0.0) throw Error(ErrorCode::InvalidArgument, "ell_y must be >= 0");
}

CostModel quadratic_cost(const QuadraticCostSpec& spec) {
  const auto m = spec.Q_u.rows();
  const auto p = spec.Q_y.rows();
  require_shape(spec.Q_u, m, m, "Q_u");
  require_shape(spec.Q_y, p, p, "Q_y");
  if (spec.r_u.size() != m) throw Error(ErrorCode::DimensionMismatch, "r_u size != rows of Q_u");
  if (spec.r_y.size() != p) throw Error(ErrorCode::DimensionMismatch, "r_y size != rows of Q_y");
  if (spec.c.size() != p) throw Error(ErrorCode::DimensionMismatch, "c size != rows of Q_y");
  if (!is_symmetric(spec.Q_u) || !is_symmetric(spec.Q_y))
    throw Error(ErrorCode::InvalidArgument, "Q_u and Q_y must be symmetric");
  const double q_y_min = p > 0 ? min_eigenvalue(spec.Q_y) : 0.0;
  if (q_y_min < -1e-12) throw Error(ErrorCode::InvalidArgument, "Q_y must be positive semidefinite");

  CostModel cost;
  cost.inputs = m;
  cost.outputs = p;
  cost.mu_u = min_eigenvalue(spec.Q_u);
  cost.ell_u = max_eigenvalue(spec.Q_u);
  cost.ell_y = p > 0 ? std::max(0.0, max_eigenvalue(spec.Q_y)) : 0.0;
  cost.time_invariant = spec.r_u.is_constant() && spec.r_y.is_constant() && spec.c.is_constant();

  const Matrix q_u = spec.Q_u;
  const Matrix q_y = spec.Q_y;
  const Signal r_u = spec.r_u;
  const Signal r_y = spec.r_y;
  const Signal c = spec.c;
  cost.input_cost = [q_u, r_u](const Vector& u, double t) {
    Vector d = u - r_u(t);
    return 0.5 * d.dot(q_u * d);
  };
  cost.input_gradient = [q_u, r_u](const Vector& u, double t) -> Vector {
    return q_u * (u - r_u(t));
  };
  cost.input_hessian = [q_u](const Vector&, double) -> Matrix { return q_u; };
  cost.output_cost = [q_y, r_y, c](const Vector& y, double t) {
    Vector d = y - r_y(t);
    return 0.5 * d.dot(q_y * d) + c(t).dot(y);
  };
  cost.output_gradient = [q_y, r_y, c](const Vector& y, double t) -> Vector {
    return q_y * (y - r_y(t)) + c(t);
  };
  cost.output_hessian = [q_y](const Vector&, double) -> Matrix { return q_y; };
  cost.validate();
  return cost;
}

void verify_cost_constants(const CostModel& cost, int samples, double radius, double t0,
                           double t1, std::uint64_t seed, double slack) {
  cost.validate();
  std::mt19937_64 rng(seed);
  auto draw = [&](Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(rng, -radius, radius);
    return v;
  };
  for (int s = 0; s < samples; ++s) {
    const double t = uniform(rng, t0, t1);
    Vector u = draw(cost.inputs), u2 = draw(cost.inputs);
    Vector du = u - u2;
    Vector dg = cost.input_gradient(u, t) - cost.input_gradient(u2, t);
    if (du.dot(dg) < cost.mu_u * du.squaredNorm() - slack)
      throw Error(ErrorCode::ConstantViolated, "input gradient not mu_u-strongly monotone");
    if (dg.norm() > cost.ell_u * du.norm() + slack)
      throw Error(ErrorCode::ConstantViolated, "input gradient not ell_u-Lipschitz");
    Vector y = draw(cost.outputs), y2 = draw(cost.outputs);
    Vector dh = cost.output_gradient(y, t) - cost.output_gradient(y2, t);
    if (dh.norm() > cost.ell_y * (y - y2).norm() + slack)
      throw Error(ErrorCode::ConstantViolated, "output gradient not ell_y-Lipschitz");
  }
}

// ---------------------------------------------------------------------------
// Sets

InputSet InputSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size())
    throw Error(ErrorCode::DimensionMismatch, "box bounds differ in size");
  if ((lower.array() > upper.array()).any())
    throw Error(ErrorCode::InvalidArgument, "box lower bound exceeds upper bound");
  InputSet s(Kind::Box, lower.size());
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

InputSet InputSet::nonneg(Eigen::Index dim) { return InputSet(Kind::NonnegOrthant, dim); }

InputSet InputSet::ball(Vector center, double radius) {
  if (!(radius >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ball radius must be >= 0");
  InputSet s(Kind::Ball, center.size());
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

InputSet InputSet::full(Eigen::Index dim) { return InputSet(Kind::FullSpace, dim); }

InputSet::Kind InputSet::parse_kind(std::string_view name) {
  if (name == "box") return Kind::Box;
  if (name == "nonneg") return Kind::NonnegOrthant;
  if (name == "ball") return Kind::Ball;
  if (name == "full") return Kind::FullSpace;
  throw Error(ErrorCode::UnsupportedSet, "unknown input set kind '" + std::string(name) + "'");
}

Vector InputSet::project(const Vector& v) const {
  require_size(v, dim_, "projection argument");
  switch (kind_) {
    case Kind::Box:
      return v.cwiseMax(lower_).cwiseMin(upper_);
    case Kind::NonnegOrthant:
      return v.cwiseMax(0.0);
    case Kind::Ball: {
      Vector d = v - center_;
      double nd = d.norm();
      if (nd <= radius_) return v;
      return center_ + (radius_ / nd) * d;
    }
    case Kind::FullSpace:
      return v;
  }
  throw Error(ErrorCode::UnsupportedSet, "unknown input set");
}

Matrix InputSet::projection_jacobian(const Vector& v) const {
  require_size(v, dim_, "projection argument");
  switch (kind_) {
    case Kind::Box: {
      Vector d = ((v.array() > lower_.array()) && (v.array() < upper_.array())).cast<double>();
      return d.asDiagonal();
    }
    case Kind::NonnegOrthant: {
      Vector d = (v.array() > 0.0).cast<double>();
      return d.asDiagonal();
    }
    case Kind::Ball: {
      Vector d = v - center_;
      double nd = d.norm();
      if (nd <= radius_) return Matrix::Identity(dim_, dim_);
      Vector n = d / nd;
      return (radius_ / nd) * (Matrix::Identity(dim_, dim_) - n * n.transpose());
    }
    case Kind::FullSpace:
      return Matrix::Identity(dim_, dim_);
  }
  throw Error(ErrorCode::UnsupportedSet, "unknown input set");
}

bool InputSet::contains(const Vector& v, double tol) const {
  require_size(v, dim_, "membership argument");
  switch (kind_) {
    case Kind::Box:
      return ((v.array() >= lower_.array() - tol) && (v.array() <= upper_.array() + tol)).all();
    case Kind::NonnegOrthant:
      return (v.array() >= -tol).all();
    case Kind::Ball:
      return (v - center_).norm() <= radius_ + tol;
    case Kind::FullSpace:
      return v.allFinite();
  }
  return false;
}

double InputSet::distance(const Vector& v) const { return (v - project(v)).norm(); }

Vector project_nonneg(const Vector& v) { return v.cwiseMax(0.0); }

// ---------------------------------------------------------------------------
// Constraints

OutputConstraint OutputConstraint::none(Eigen::Index outputs) {
  OutputConstraint c;
  c.kind = ConstraintKind::Inequality;
  c.rows = 0;
  c.outputs = outputs;
  c.K = [outputs](double) { return Matrix(0, outputs); };
  c.e = Signal::zero(0);
  return c;
}

OutputConstraint OutputConstraint::fixed(ConstraintKind kind, Matrix K, Signal e, double horizon) {
  if (e.size() != K.rows())
    throw Error(ErrorCode::DimensionMismatch, "constraint e size != rows of K");
  OutputConstraint c;
  c.kind = kind;
  c.rows = K.rows();
  c.outputs = K.cols();
  c.K_bar = spectral_norm(K);
  if (e.is_constant()) {
    c.e_bar = e(0.0).norm();
  } else {
    double best = 0.0;
    const int samples = 4000;
    for (int i = 0; i <= samples; ++i) best = std::max(best, e(horizon * i / samples).norm());
    c.e_bar = best * (1.0 + 1e-9);
  }
  c.K = [K](double) { return K; };
  c.e = std::move(e);
  c.constant_K = true;
  return c;
}

OutputConstraint OutputConstraint::time_varying(ConstraintKind kind, Eigen::Index rows,
                                                Eigen::Index outputs,
                                                std::function<Matrix(double)> K, Signal e,
                                                double K_bar, double e_bar) {
  if (e.size() != rows) throw Error(ErrorCode::DimensionMismatch, "constraint e size != rows");
  OutputConstraint c;
  c.kind = kind;
  c.rows = rows;
  c.outputs = outputs;
  c.K = std::move(K);
  c.e = std::move(e);
  c.K_bar = K_bar;
  c.e_bar = e_bar;
  c.constant_K = false;
  return c;
}

void OutputConstraint::check_bounds(double t0, double t1, int samples) const {
  for (int i = 0; i <= samples; ++i) {
    double t = samples == 0 ? t0 : t0 + (t1 - t0) * i / samples;
    Matrix k = K(t);
    require_shape(k, rows, outputs, "K_t");
    if (spectral_norm(k) > K_bar * (1.0 + 1e-12) + 1e-12)
      throw Error(ErrorCode::BoundViolated, "||K_t|| exceeds K_bar at t = " + std::to_string(t));
    if (e(t).norm() > e_bar * (1.0 + 1e-12) + 1e-12)
      throw Error(ErrorCode::BoundViolated, "||e_t|| exceeds e_bar at t = " + std::to_string(t));
  }
}

// ---------------------------------------------------------------------------
// Problem

TimeVaryingProblem::TimeVaryingProblem(CostModel cost, OutputConstraint constraint,
                                       InputSet input_set, double nu, SteadyStateMap map,
                                       Signal disturbance)
    : cost_(std::move(cost)),
      constraint_(std::move(constraint)),
      input_set_(std::move(input_set)),
      nu_(nu),
      map_(std::move(map)),
      disturbance_(std::move(disturbance)) {
  cost_.validate();
  const auto m = map_.G.cols();
  const auto p = map_.G.rows();
  if (map_.H.rows() != p) throw Error(ErrorCode::DimensionMismatch, "H rows != G rows");
  if (cost_.inputs != m) throw Error(ErrorCode::DimensionMismatch, "cost input size != m");
  if (cost_.outputs != p) throw Error(ErrorCode::DimensionMismatch, "cost output size != p");
  if (constraint_.outputs != p)
    throw Error(ErrorCode::DimensionMismatch, "constraint output size != p");
  if (input_set_.dim() != m) throw Error(ErrorCode::DimensionMismatch, "input set size != m");
  if (disturbance_.size() != map_.H.cols())
    throw Error(ErrorCode::DimensionMismatch, "disturbance size != columns of H");
  if (constraint_.kind == ConstraintKind::Inequality) {
    if (!(nu_ > 0.0))
      throw Error(ErrorCode::InvalidArgument, "inequality problems need nu > 0");
  } else {
    if (nu_ != 0.0) throw Error(ErrorCode::InvalidArgument, "equality problems take nu = 0");
    if (input_set_.kind() != InputSet::Kind::FullSpace)
      throw Error(ErrorCode::InvalidArgument, "equality problems use an unconstrained input");
    if (constraint_.constant_K && !constraint_.k_lo) {
      Matrix kg = constraint_.K(0.0) * map_.G;
      Matrix gram = kg * kg.transpose();
      constraint_.k_lo = min_eigenvalue(gram);
      constraint_.k_hi = max_eigenvalue(gram);
    }
  }
}

bool TimeVaryingProblem::is_static() const {
  return cost_.time_invariant && constraint_.constant_K && constraint_.e.is_constant() &&
         disturbance_.is_constant();
}

Vector TimeVaryingProblem::steady_output(const Vector& u, double t) const {
  return map_.G * u + map_.H * disturbance_(t);
}

Vector TimeVaryingProblem::saddle_map(const ControllerState& z, double t) const {
  return saddle_map(z, t, nu_);
}

Vector TimeVaryingProblem::saddle_map(const ControllerState& z, double t, double nu) const {
  require_size(z.u, inputs(), "u");
  require_size(z.lambda, multipliers(), "lambda");
  const Vector y = steady_output(z.u, t);
  const Matrix k = constraint_.K(t);
  Vector f(inputs() + multipliers());
  f.head(inputs()) = cost_.input_gradient(z.u, t) +
                     map_.G.transpose() * (cost_.output_gradient(y, t) + k.transpose() * z.lambda);
  f.tail(multipliers()) = -(k * y - constraint_.e(t) - nu * z.lambda);
  return f;
}

namespace {

Matrix numerical_jacobian(const CostModel::Gradient& grad, const Vector& x, double t) {
  const auto n = x.size();
  Matrix j(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    j.col(i) = (grad(xp, t) - grad(xm, t)) / (2.0 * h);
  }
  return 0.5 * (j + j.transpose());
}

}  // namespace

Matrix TimeVaryingProblem::saddle_jacobian(const ControllerState& z, double t, double nu) const {
  const auto m = inputs();
  const auto r = multipliers();
  const Vector y = steady_output(z.u, t);
  const Matrix k = constraint_.K(t);
  Matrix hu = cost_.input_hessian ? cost_.input_hessian(z.u, t)
                                  : numerical_jacobian(cost_.input_gradient, z.u, t);
  Matrix hy = cost_.output_hessian ? cost_.output_hessian(y, t)
                                   : numerical_jacobian(cost_.output_gradient, y, t);
  Matrix j(m + r, m + r);
  const Matrix kg = k * map_.G;
  j.topLeftCorner(m, m) = hu + map_.G.transpose() * hy * map_.G;
  j.topRightCorner(m, r) = kg.transpose();
  j.bottomLeftCorner(r, m) = -kg;
  j.bottomRightCorner(r, r) = nu * Matrix::Identity(r, r);
  return j;
}

ModifiedGradients TimeVaryingProblem::modified_gradients(const Vector& u, const Vector& y,
                                                         const Vector& lambda, double t) const {
  require_size(u, inputs(), "u");
  require_size(y, outputs(), "y");
  require_size(lambda, multipliers(), "lambda");
  const Matrix k = constraint_.K(t);
  ModifiedGradients g;
  g.L_u = cost_.input_gradient(u, t) +
          map_.G.transpose() * (cost_.output_gradient(y, t) + k.transpose() * lambda);
  g.L_lambda = k * y - constraint_.e(t) - nu_ * lambda;
  return g;
}

double TimeVaryingProblem::monotonicity_modulus() const { return std::min(cost_.mu_u, nu_); }

double TimeVaryingProblem::lipschitz_bound() const {
  const double g = spectral_norm(map_.G);
  return std::sqrt(2.0) * (constraint_.K_bar + std::max(cost_.ell_u + g * g * cost_.ell_y, nu_));
}

ControllerState TimeVaryingProblem::project_feasible(const ControllerState& z) const {
  if (kind() == ConstraintKind::Equality) return z;
  return {input_set_.project(z.u), project_nonneg(z.lambda)};
}

// ---------------------------------------------------------------------------
// Saddle-point oracle

namespace {

struct ProjectionOps {
  const TimeVaryingProblem& problem;
  bool project_dual;

  Vector project(const Vector& v) const {
    const auto m = problem.inputs();
    Vector out(v.size());
    out.head(m) = problem.input_set().project(v.head(m));
    out.tail(v.size() - m) = project_dual ? project_nonneg(v.tail(v.size() - m))
                                          : Vector(v.tail(v.size() - m));
    return out;
  }

  Matrix jacobian(const Vector& v) const {
    const auto m = problem.inputs();
    const auto r = v.size() - m;
    Matrix d = Matrix::Zero(v.size(), v.size());
    d.topLeftCorner(m, m) = problem.input_set().projection_jacobian(v.head(m));
    if (project_dual) {
      for (Eigen::Index i = 0; i < r; ++i) d(m + i, m + i) = v(m + i) > 0.0 ? 1.0 : 0.0;
    } else {
      d.bottomRightCorner(r, r).setIdentity();
    }
    return d;
  }
};

}  // namespace

double fixed_point_residual(const TimeVaryingProblem& problem, const ControllerState& z, double t,
                            double step, double nu) {
  ProjectionOps ops{problem, problem.kind() == ConstraintKind::Inequality};
  const Vector zs = z.stacked();
  return (zs - ops.project(zs - step * problem.saddle_map(z, t, nu))).norm();
}

SaddlePoint solve_saddle_point(const TimeVaryingProblem& problem, double t,
                               const SaddleOptions& options) {
  const auto m = problem.inputs();
  const auto r = problem.multipliers();
  const bool inequality = problem.kind() == ConstraintKind::Inequality;
  const double nu = (inequality && !options.exact) ? problem.nu() : 0.0;

  if (!inequality && r > 0) {
    Matrix kg = problem.constraint().K(t) * problem.map().G;
    if (numerical_rank(kg) < r)
      throw Error(ErrorCode::Infeasible, "K G is rank deficient; the KKT system is singular");
  }

  ProjectionOps ops{problem, inequality};
  // Scaled natural map z - P(z - alpha F(z)); alpha only conditions the
  // Newton system, the zero set is the same for every alpha > 0.
  const double g_norm = spectral_norm(problem.map().G);
  const double ell = std::sqrt(2.0) * (problem.constraint().K_bar +
                                       std::max(problem.cost().ell_u +
                                                    g_norm * g_norm * problem.cost().ell_y,
                                                nu));
  const double alpha = 1.0 / ell;
  const double mu = std::min(problem.cost().mu_u, nu);

  auto residual = [&](const Vector& z, double step) {
    ControllerState zs = ControllerState::split(z, m);
    return Vector(z - ops.project(z - step * problem.saddle_map(zs, t, nu)));
  };

  Vector z(m + r);
  if (options.warm_start) {
    z = options.warm_start->stacked();
    require_size(z, m + r, "warm start");
  } else {
    z.head(m) = problem.input_set().project(Vector::Zero(m));
    z.tail(r).setZero();
  }
  z = ops.project(z);

  SaddlePoint out;
  for (int it = 0; it < options.max_iterations; ++it) {
    const double natural = residual(z, 1.0).norm();
    if (natural < options.tol) {
      auto zs = ControllerState::split(z, m);
      out.u = zs.u;
      out.lambda = zs.lambda;
      out.kkt_residual = natural;
      out.iterations = it;
      return out;
    }
    ControllerState zs = ControllerState::split(z, m);
    const Vector f = problem.saddle_map(zs, t, nu);
    const Vector v = z - alpha * f;
    const Vector res = z - ops.project(v);
    const double res_norm = res.norm();
    const Matrix d = ops.jacobian(v);
    const Matrix jf = problem.saddle_jacobian(zs, t, nu);
    const Matrix jr = Matrix::Identity(m + r, m + r) - d * (Matrix::Identity(m + r, m + r) - alpha * jf);
    Vector step = jr.fullPivLu().solve(-res);

    bool accepted = false;
    if (step.allFinite()) {
      double s = 1.0;
      while (s > 1e-10) {
        Vector trial = z + s * step;
        if (residual(trial, alpha).norm() <= (1.0 - 1e-4 * s) * res_norm) {
          z = trial;
          accepted = true;
          break;
        }
        s *= 0.5;
      }
    }
    if (!accepted) {
      // Forward-Euler step of the projected flow; contracts when mu > 0.
      const double h = mu > 0.0 ? mu / (ell * ell) : alpha;
      z = ops.project(z - h * f);
    }
  }
  throw Error(ErrorCode::NoConvergence,
              "saddle-point residual " + std::to_string(residual(z, 1.0).norm()) +
                  " above tolerance after " + std::to_string(options.max_iterations) +
                  " iterations");
}

SaddlePoint solve_saddle_point(const TimeVaryingProblem& problem, const LtiPlant& plant, double t,
                               const SaddleOptions& options) {
  SaddlePoint sp = solve_saddle_point(problem, t, options);
  sp.x = plant.equilibrium(sp.u, problem.disturbance()(t));
  return sp;
}

RegularizationErrorReport regularization_error_check(const TimeVaryingProblem& problem, double t,
                                                     double slack) {
  if (problem.kind() != ConstraintKind::Inequality)
    throw Error(ErrorCode::InvalidArgument, "regularization error applies to inequality problems");
  RegularizationErrorReport rep;
  rep.regularized = solve_saddle_point(problem, t);
  SaddleOptions exact;
  exact.exact = true;
  rep.exact = solve_saddle_point(problem, t, exact);
  const double nu = problem.nu();
  const double mu_u = problem.cost().mu_u;
  rep.input_gap = (rep.regularized.u - rep.exact.u).norm();
  rep.lhs = mu_u * rep.input_gap * rep.input_gap + 0.5 * nu * rep.regularized.lambda.squaredNorm();
  rep.rhs = 0.5 * nu * rep.exact.lambda.squaredNorm();
  rep.pass = rep.lhs <= rep.rhs + slack;
  rep.input_gap_bound = std::sqrt(nu / (2.0 * mu_u)) * rep.exact.lambda.norm();
  rep.gap_pass = rep.input_gap <= rep.input_gap_bound + slack;
  return rep;
}

double estimate_saddle_rate(const TimeVaryingProblem& problem, double t0, double t1,
                            double grid_dt) {
  if (problem.is_static()) return 0.0;
  if (!(grid_dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid_dt must be positive");
  const double h = 0.5 * grid_dt;
  SaddleOptions opts;
  double best = 0.0;
  const auto steps = static_cast<long>(std::ceil((t1 - t0) / grid_dt));
  for (long i = 0; i <= steps; ++i) {
    const double t = std::min(t0 + i * grid_dt, t1);
    SaddlePoint lo = solve_saddle_point(problem, t - h, opts);
    opts.warm_start = lo.z();
    SaddlePoint hi = solve_saddle_point(problem, t + h, opts);
    opts.warm_start = hi.z();
    best = std::max(best, (hi.z().stacked() - lo.z().stacked()).norm() / (2.0 * h));
  }
  return best;
}

}  // namespace pdflow
