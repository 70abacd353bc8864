#include "pdflow/controllers.hpp"

#include <algorithm>
#include <cmath>

#include "pdflow/error.hpp"

namespace pdflow {

ControllerState projected_pd_field(const TimeVaryingProblem& problem, const ControllerState& z,
                                   const Vector& y, double t, double eta) {
  if (problem.kind() != ConstraintKind::Inequality)
    throw Error(ErrorCode::InvalidArgument, "projected controller needs an inequality problem");
  const auto g = problem.modified_gradients(z.u, y, z.lambda, t);
  return {problem.input_set().project(z.u - eta * g.L_u) - z.u,
          project_nonneg(z.lambda + eta * g.L_lambda) - z.lambda};
}

std::vector<double> default_delta_sequence() {
  return {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
}

ControllerState discontinuous_projected_field(const TimeVaryingProblem& problem,
                                              const ControllerState& z, const Vector& y, double t,
                                              double eta, const std::vector<double>& delta_seq) {
  if (delta_seq.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "need at least two delta values");
  const auto g = problem.modified_gradients(z.u, y, z.lambda, t);
  const Vector drift_u = -eta * g.L_u;
  const Vector drift_l = eta * g.L_lambda;
  Vector prev, cur;
  for (std::size_t k = 0; k < delta_seq.size(); ++k) {
    const double delta = delta_seq[k];
    Vector q(z.u.size() + z.lambda.size());
    q << (problem.input_set().project(z.u + delta * drift_u) - z.u) / delta,
        (project_nonneg(z.lambda + delta * drift_l) - z.lambda) / delta;
    prev = std::move(cur);
    cur = std::move(q);
  }
  if ((cur - prev).norm() > 1e-4)
    throw Error(ErrorCode::LimitNotSettled,
                "difference quotients still moving by " + std::to_string((cur - prev).norm()));
  return ControllerState::split(cur, z.u.size());
}

ControllerState equality_pd_field(const TimeVaryingProblem& problem, const ControllerState& z,
                                  const Vector& y, double t, double eta_u, double eta_lambda) {
  if (problem.kind() != ConstraintKind::Equality)
    throw Error(ErrorCode::InvalidArgument, "equality controller needs an equality problem");
  const auto g = problem.modified_gradients(z.u, y, z.lambda, t);
  // nu = 0 for this kind, so L_lambda = K y - e.
  return {-eta_u * g.L_u, eta_lambda * g.L_lambda};
}

Vector alinea_field(const AlineaLaw& law, const Vector& densities) {
  const auto links = densities.size();
  if (law.gains.size() != links || law.setpoints.size() != links)
    throw Error(ErrorCode::DimensionMismatch, "ALINEA gains/setpoints must cover every link");
  Vector rate = Vector::Zero(static_cast<Eigen::Index>(law.ramps.size()));
  for (std::size_t i = 0; i < law.ramps.size(); ++i) {
    for (Eigen::Index j : law.ramps[i].downstream) {
      if (j < 0 || j >= links)
        throw Error(ErrorCode::UnknownLink, "downstream link index " + std::to_string(j));
      rate(static_cast<Eigen::Index>(i)) += law.gains(j) * (law.setpoints(j) - densities(j));
    }
  }
  return rate;
}

// ---------------------------------------------------------------------------
// MPC

QpResult solve_inequality_qp(const Matrix& H, const Vector& f, const Matrix& A, const Vector& b,
                             double tol, long max_iterations) {
  const auto n = H.rows();
  const auto m = A.rows();
  require_shape(H, n, n, "QP H");
  require_size(f, n, "QP f");
  require_shape(A, m, n, "QP A");
  require_size(b, m, "QP b");

  QpResult out;
  out.z = Vector::Zero(n);
  auto residuals = [&](const Vector& z, const Vector& s, const Vector& y, Vector& rd, Vector& rp) {
    rd = H * z + f + A.transpose() * y;
    rp = A * z + s - b;
  };
  const double f_scale = 1.0 + (f.size() ? f.cwiseAbs().maxCoeff() : 0.0);
  const double b_scale = 1.0 + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0);

  if (m == 0) {
    Eigen::LLT<Matrix> llt(H);
    out.z = llt.solve(-f);
    out.multipliers = Vector::Zero(0);
    out.residual = (H * out.z + f).cwiseAbs().maxCoeff() / f_scale;
    out.converged = out.residual < tol;
    return out;
  }

  Vector z = Vector::Zero(n);
  Vector s = (b - A * z).cwiseMax(1.0);
  Vector y = Vector::Ones(m);
  Vector rd, rp;
  auto max_step = [](const Vector& v, const Vector& dv) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
    return alpha;
  };

  for (long it = 1; it <= max_iterations; ++it) {
    residuals(z, s, y, rd, rp);
    const double mu = s.dot(y) / static_cast<double>(m);
    out.residual = std::max({rd.cwiseAbs().maxCoeff() / f_scale,
                             (A * z - b).cwiseMax(0.0).maxCoeff() / b_scale, mu});
    out.iterations = it - 1;
    if (out.residual < tol) {
      out.converged = true;
      break;
    }

    const Vector w = y.cwiseQuotient(s);
    Matrix normal = H + A.transpose() * w.asDiagonal() * A;
    Eigen::LDLT<Matrix> ldlt(normal);
    if (ldlt.info() != Eigen::Success) break;

    auto direction = [&](const Vector& rc, Vector& dz, Vector& ds, Vector& dy) {
      const Vector rhs = -rd - A.transpose() * (rc + y.cwiseProduct(rp)).cwiseQuotient(s);
      dz = ldlt.solve(rhs);
      ds = -rp - A * dz;
      dy = (rc - y.cwiseProduct(ds)).cwiseQuotient(s);
    };

    Vector dz, ds, dy;
    direction(-s.cwiseProduct(y), dz, ds, dy);
    const double a_aff = std::min(max_step(s, ds), max_step(y, dy));
    const double mu_aff = (s + a_aff * ds).dot(y + a_aff * dy) / static_cast<double>(m);
    const double sigma = std::pow(mu_aff / mu, 3);

    const Vector rc = -s.cwiseProduct(y) + Vector::Constant(m, sigma * mu) - ds.cwiseProduct(dy);
    direction(rc, dz, ds, dy);
    const double alpha = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(y, dy)));
    z += alpha * dz;
    s += alpha * ds;
    y += alpha * dy;
    out.iterations = it;
  }
  out.z = z;
  out.multipliers = y;
  return out;
}

namespace {

long whole_steps(double span, double dt, const char* what) {
  const double ratio = span / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be a positive multiple of dt");
  return static_cast<long>(rounded);
}

}  // namespace

MpcPlan mpc_policy(const MpcModel& model, const MpcObjective& objective, const Vector& x_hat,
                   const MpcOptions& options) {
  const auto n = model.A.rows();
  const auto m = model.B.cols();
  require_shape(model.A, n, n, "MPC A");
  require_shape(model.B, n, m, "MPC B");
  require_shape(objective.Q_u, m, m, "MPC Q_u");
  require_size(objective.u_ref, m, "MPC u_ref");
  require_size(objective.throughput_weights, n, "MPC throughput weights");
  require_size(objective.ceilings, n, "MPC ceilings");
  require_size(x_hat, n, "MPC initial state");
  if (!(options.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "MPC dt must be positive");
  if (options.replan > options.horizon)
    throw Error(ErrorCode::InvalidArgument, "replan interval T_s must not exceed horizon T_p");
  const long horizon = whole_steps(options.horizon, options.dt, "T_p");
  const long applied = whole_steps(options.replan, options.dt, "T_s");
  const double dt = options.dt;

  // x_{k+1} = Ad x_k + Bd u_k  stacked as  X = Phi x0 + Gamma U.
  const Matrix ad = Matrix::Identity(n, n) + dt * model.A;
  const Matrix bd = dt * model.B;
  const Eigen::Index nn = n * horizon;
  const Eigen::Index mm = m * horizon;
  Matrix phi(nn, n);
  Matrix gamma = Matrix::Zero(nn, mm);
  Matrix power = ad;
  for (long k = 0; k < horizon; ++k) {
    phi.block(k * n, 0, n, n) = power;
    power = ad * power;
  }
  for (long k = 0; k < horizon; ++k) {
    // x_{k+1} depends on u_j, j <= k, through Ad^{k-j} Bd.
    Matrix blk = bd;
    for (long j = k; j >= 0; --j) {
      gamma.block(k * n, j * m, n, m) = blk;
      blk = ad * blk;
    }
  }

  const Matrix q_u = 0.5 * (objective.Q_u + objective.Q_u.transpose());
  Matrix h = Matrix::Zero(mm, mm);
  Vector f = Vector::Zero(mm);
  Vector c_stack(nn);
  for (long k = 0; k < horizon; ++k) {
    h.block(k * m, k * m, m, m) = 2.0 * dt * q_u;
    f.segment(k * m, m) = -2.0 * dt * q_u * objective.u_ref;
    c_stack.segment(k * n, n) = objective.throughput_weights;
  }
  const Vector free_response = phi * x_hat;
  h += 2.0 * dt * objective.delta * gamma.transpose() * gamma;
  f += dt * gamma.transpose() * (2.0 * objective.delta * free_response - c_stack);
  h = 0.5 * (h + h.transpose());

  Vector b(nn);
  for (long k = 0; k < horizon; ++k) b.segment(k * n, n) = objective.ceilings;
  b -= free_response;

  MpcPlan plan;
  const bool monotone = (gamma.array() >= 0.0).all();
  plan.softened = monotone && (b.array() < 0.0).any();

  // Rows: Gamma v <= b and -v <= 0; the softened form adds slacks sigma >= 0
  // on the density rows with penalty w/2 ||sigma||^2.
  const Eigen::Index nz = plan.softened ? mm + nn : mm;
  Matrix hq = Matrix::Zero(nz, nz);
  Vector fq = Vector::Zero(nz);
  hq.topLeftCorner(mm, mm) = h;
  fq.head(mm) = f;
  Matrix a = Matrix::Zero(nn + nz, nz);
  Vector rhs = Vector::Zero(nn + nz);
  a.topLeftCorner(nn, mm) = gamma;
  rhs.head(nn) = b;
  a.bottomRows(nz) = -Matrix::Identity(nz, nz);
  if (plan.softened) {
    hq.bottomRightCorner(nn, nn) = options.soft_penalty * Matrix::Identity(nn, nn);
    a.block(0, mm, nn, nn) = -Matrix::Identity(nn, nn);
  }
  const QpResult res = solve_inequality_qp(hq, fq, a, rhs, options.tol, options.max_iterations);
  plan.iterations = res.iterations;
  plan.residual = res.residual;
  if (!res.converged)
    throw Error(ErrorCode::QPNoConvergence,
                std::string(plan.softened ? "softened " : "") + "MPC QP residual " +
                    std::to_string(res.residual) + " after " + std::to_string(res.iterations) +
                    " iterations");
  const Vector v = res.z.head(mm);

  plan.inputs.reserve(static_cast<std::size_t>(applied));
  for (long k = 0; k < applied; ++k) plan.inputs.push_back(v.segment(k * m, m).cwiseMax(0.0));
  return plan;
}

}  // namespace pdflow
