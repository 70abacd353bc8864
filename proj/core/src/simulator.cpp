#include "pdflow/simulator.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "pdflow/error.hpp"

namespace pdflow {

Diagnostics diagnostics_for(const CertifiedPlant& plant, const CertificateReport& report) {
  if (!plant.stability) throw Error(ErrorCode::MissingCertificate, "plant has no certificate");
  Diagnostics d;
  d.coefficients = envelope_coefficients(report);
  d.theta = report.theta;
  // Empty weight means V = 1/2 ||z~||^2.
  d.P_x = plant.stability->P_x;
  return d;
}

Diagnostics diagnostics_for(const CertifiedPlant& plant, const EqualityCertificate& report) {
  if (!plant.stability) throw Error(ErrorCode::MissingCertificate, "plant has no certificate");
  Diagnostics d;
  d.coefficients = envelope_coefficients(report);
  d.theta = report.theta;
  d.V_weight = report.P_z;
  d.P_x = plant.stability->P_x;
  return d;
}

double tracking_error(const LtiPlant& plant, const SaddlePoint& star, const Vector& x,
                      const ControllerState& z, const Vector& w) {
  const Vector x_star = star.x.size() == x.size() ? star.x : plant.equilibrium(star.u, w);
  return std::sqrt((x - x_star).squaredNorm() + (z.u - star.u).squaredNorm() +
                   (z.lambda - star.lambda).squaredNorm());
}

namespace {

double feasibility_gap(const TimeVaryingProblem& problem, const ControllerState& z) {
  if (problem.kind() == ConstraintKind::Equality) return 0.0;
  return std::sqrt(std::pow(problem.input_set().distance(z.u), 2) +
                   z.lambda.cwiseMin(0.0).squaredNorm());
}

}  // namespace

TrajectoryLog integrate(const CertifiedPlant& plant, const TimeVaryingProblem& problem,
                        const Vector& x0, const ControllerState& z0,
                        const SimulationOptions& options) {
  const auto& lti = plant.plant;
  const auto n = lti.states();
  const auto m = problem.inputs();
  const auto r = problem.multipliers();
  const double eps = options.gains.eps;
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (!(options.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (options.dt > eps / 10.0 * (1.0 + 1e-12))
    throw Error(ErrorCode::StepTooLarge, "dt = " + std::to_string(options.dt) +
                                             " exceeds eps / 10 = " + std::to_string(eps / 10.0));
  if (!(options.t1 >= options.t0) || !std::isfinite(options.t1))
    throw Error(ErrorCode::InvalidArgument, "t_span must be finite and ordered");
  if (options.log_every < 1) throw Error(ErrorCode::InvalidArgument, "log_every must be >= 1");
  require_size(x0, n, "x0");
  require_size(z0.u, m, "u0");
  require_size(z0.lambda, r, "lambda0");
  if (lti.inputs() != m || lti.outputs() != problem.outputs())
    throw Error(ErrorCode::DimensionMismatch, "plant and problem dimensions disagree");
  const bool projected = options.controller == ControllerKind::ProjectedPD;
  if (projected != (problem.kind() == ConstraintKind::Inequality))
    throw Error(ErrorCode::InvalidArgument, "controller kind does not match the constraint kind");

  const auto& w_sig = problem.disturbance();
  auto field = [&](double t, const Vector& s) -> Vector {
    const Vector x = s.head(n);
    const ControllerState z{s.segment(n, m), s.tail(r)};
    const Vector w = w_sig(t);
    const Vector y = lti.output(x, w);
    const ControllerState zd =
        projected ? projected_pd_field(problem, z, y, t, options.gains.eta)
                  : equality_pd_field(problem, z, y, t, options.gains.eta_u,
                                      options.gains.eta_lambda);
    Vector out(n + m + r);
    out << lti.vector_field(x, z.u, w, eps), zd.u, zd.lambda;
    return out;
  };

  TrajectoryLog log;
  log.n = n;
  log.m = m;
  log.r = r;
  log.p = lti.outputs();
  log.log_dt = options.dt * options.log_every;

  auto record = [&](double t, const Vector& s) {
    LogRecord rec;
    rec.t = t;
    rec.x = s.head(n);
    rec.u = s.segment(n, m);
    rec.lambda = s.tail(r);
    rec.w = w_sig(t);
    rec.y = lti.output(rec.x, rec.w);
    log.records.push_back(std::move(rec));
  };

  Vector s(n + m + r);
  s << x0, z0.u, z0.lambda;
  const double span = options.t1 - options.t0;
  const long steps = static_cast<long>(std::ceil(span / options.dt - 1e-9));

  const double entry_tol = 1e-12;
  bool entered = feasibility_gap(problem, z0) <= entry_tol;
  log.entry_time = entered ? options.t0 : std::numeric_limits<double>::quiet_NaN();
  record(options.t0, s);
  for (long k = 1; k <= steps; ++k) {
    const double t = options.t0 + static_cast<double>(k - 1) * options.dt;
    const double h = std::min(options.dt, options.t1 - t);
    s = rk4_step(field, t, s, h);
    if (!s.allFinite())
      throw Error(ErrorCode::NonFiniteState, "state became non-finite at t = " + std::to_string(t + h));
    const double t_now = t + h;
    const double gap = feasibility_gap(problem, ControllerState{s.segment(n, m), s.tail(r)});
    if (entered) {
      log.max_exit_distance = std::max(log.max_exit_distance, gap);
    } else if (gap <= entry_tol) {
      entered = true;
      log.entry_time = t_now;
    }
    if (k % options.log_every == 0 || k == steps) record(t_now, s);
  }

  if (!options.track_oracle) {
    for (auto& rec : log.records) rec.err = rec.envelope = std::numeric_limits<double>::quiet_NaN();
    return log;
  }

  SaddleOptions sopts;
  sopts.tol = options.oracle_tol;
  const bool fixed = problem.is_static();
  std::optional<SaddlePoint> cached;
  for (auto& rec : log.records) {
    SaddlePoint star;
    if (fixed && cached) {
      star = *cached;
    } else {
      star = solve_saddle_point(problem, lti, rec.t, sopts);
      sopts.warm_start = star.z();
      cached = star;
    }
    if (star.x.size() != n) star.x = lti.equilibrium(star.u, rec.w);
    rec.u_star = star.u;
    rec.lambda_star = star.lambda;
    rec.x_star = star.x;
    rec.err = tracking_error(lti, star, rec.x, {rec.u, rec.lambda}, rec.w);
  }

  const auto& recs = log.records;
  if (options.sup_zstar_rate) {
    log.sup_zstar_rate = *options.sup_zstar_rate;
  } else if (!fixed && recs.size() > 1) {
    auto zstar = [&](std::size_t i) {
      Vector z(m + r);
      z << recs[i].u_star, recs[i].lambda_star;
      return z;
    };
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 == recs.size() ? i : i + 1;
      const double dt = recs[hi].t - recs[lo].t;
      if (dt > 0.0) log.sup_zstar_rate = std::max(log.sup_zstar_rate, (zstar(hi) - zstar(lo)).norm() / dt);
    }
  }
  log.sup_w_rate = options.sup_w_rate ? *options.sup_w_rate
                                      : w_sig.sup_rate(options.t0, options.t1, 1e-3);

  if (!options.diagnostics) {
    for (auto& rec : log.records) rec.envelope = std::numeric_limits<double>::quiet_NaN();
    return log;
  }
  const auto& diag = *options.diagnostics;
  log.envelope_floor = envelope_floor(diag.coefficients, log.sup_zstar_rate, log.sup_w_rate);
  const double e0 = log.records.front().err;
  const Matrix AinvB = plant.A_inv * lti.B();
  const Matrix AinvE = plant.A_inv * lti.E();
  for (auto& rec : log.records) {
    // Uncertified gains still get the Lyapunov columns, just no bound.
    rec.envelope = diag.coefficients.pass
                       ? envelope(diag.coefficients, e0, options.t0, rec.t, log.sup_zstar_rate,
                                  log.sup_w_rate)
                       : std::numeric_limits<double>::quiet_NaN();
    Vector zt(m + r);
    zt << rec.u - rec.u_star, rec.lambda - rec.lambda_star;
    rec.V = diag.V_weight.size() == 0 ? 0.5 * zt.squaredNorm() : zt.dot(diag.V_weight * zt);
    const Vector xt = rec.x + AinvB * rec.u + AinvE * rec.w;
    rec.W = xt.dot(diag.P_x * xt);
    rec.U = (1.0 - diag.theta) * rec.V + diag.theta * rec.W;
  }
  return log;
}

TrackingReport tracking_report(const TrajectoryLog& log) {
  TrackingReport rep;
  rep.envelope_floor = log.envelope_floor;
  const auto& recs = log.records;
  if (recs.empty()) {
    rep.empty_fit = true;
    rep.decay_slope = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  rep.initial_error = recs.front().err;
  rep.final_error = recs.back().err;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (const auto& rec : recs)
    if (std::isfinite(rec.envelope))
      rep.max_violation = std::max(rep.max_violation, rec.err - rec.envelope);
  if (!std::isfinite(rep.max_violation)) rep.max_violation = std::numeric_limits<double>::quiet_NaN();

  const auto tail_start = recs.size() - std::max<std::size_t>(1, recs.size() / 10);
  double sum = 0.0;
  for (std::size_t i = tail_start; i < recs.size(); ++i) sum += recs[i].err;
  rep.asymptotic_error = sum / static_cast<double>(recs.size() - tail_start);

  // Transient: from the start until the error first drops to ten times the
  // residual floor (or to the numerical floor for static runs).
  const double stop = std::max(10.0 * log.envelope_floor, 1e-10);
  double st = 0, sl = 0, stt = 0, stl = 0;
  int count = 0;
  for (const auto& rec : recs) {
    if (!(rec.err > stop)) break;
    const double lv = std::log(rec.err);
    st += rec.t;
    sl += lv;
    stt += rec.t * rec.t;
    stl += rec.t * lv;
    ++count;
  }
  const double det = count * stt - st * st;
  if (count < 2 || det <= 0.0) {
    rep.empty_fit = true;
    rep.decay_slope = std::numeric_limits<double>::quiet_NaN();
  } else {
    rep.decay_slope = (count * stl - st * sl) / det;
  }
  return rep;
}

LyapunovReport lyapunov_diagnostics(const TrajectoryLog& log, double noise_floor) {
  LyapunovReport rep;
  rep.ball_radius = std::max(log.envelope_floor, noise_floor);
  const auto& recs = log.records;
  for (const auto& rec : recs) {
    rep.V.push_back(rec.V);
    rep.W.push_back(rec.W);
    rep.U.push_back(rec.U);
  }
  for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
    const bool grew = recs[k + 1].U > recs[k].U * (1.0 + 1e-12) + 1e-300;
    const bool outside = recs[k].err > rep.ball_radius;
    rep.flagged.push_back(grew && outside);
    if (grew && outside) ++rep.flagged_count;
  }
  return rep;
}

namespace {

void put(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void write_csv(const TrajectoryLog& log, std::ostream& out) {
  out << "# t: time\n"
      << "# x_i: plant state, i = 1.." << log.n << "\n"
      << "# u_i: controller input, i = 1.." << log.m << "\n"
      << "# lambda_i: dual multiplier, i = 1.." << log.r << "\n"
      << "# y_i: measured output C x + D w, i = 1.." << log.p << "\n"
      << "# err: ||xi - xi*|| against the saddle-point oracle\n"
      << "# envelope: certified tracking bound (nan when uncertified)\n"
      << "# V: controller Lyapunov function of z - z*\n"
      << "# W: plant Lyapunov function x~^T P_x x~, x~ = x + A^-1 B u + A^-1 E w\n"
      << "# U: (1 - theta) V + theta W\n";
  out << "t";
  for (Eigen::Index i = 1; i <= log.n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= log.m; ++i) out << ",u_" << i;
  for (Eigen::Index i = 1; i <= log.r; ++i) out << ",lambda_" << i;
  for (Eigen::Index i = 1; i <= log.p; ++i) out << ",y_" << i;
  out << ",err,envelope,V,W,U\n";
  for (const auto& rec : log.records) {
    put(out, rec.t);
    for (const Vector* v : {&rec.x, &rec.u, &rec.lambda, &rec.y})
      for (Eigen::Index i = 0; i < v->size(); ++i) {
        out << ',';
        put(out, (*v)(i));
      }
    for (double v : {rec.err, rec.envelope, rec.V, rec.W, rec.U}) {
      out << ',';
      put(out, v);
    }
    out << '\n';
  }
}

void write_csv(const TrajectoryLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + path + " for writing");
  write_csv(log, out);
}

ReducedTrajectory integrate_reduced(const TimeVaryingProblem& problem, const ControllerState& z0,
                                    double eta, double t0, double t1, double dt,
                                    ReducedField field) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const auto m = problem.inputs();
  auto eval = [&](double t, const ControllerState& z) {
    const Vector y = problem.steady_output(z.u, t);
    return field == ReducedField::Lipschitz ? projected_pd_field(problem, z, y, t, eta)
                                            : discontinuous_projected_field(problem, z, y, t, eta);
  };
  auto stacked_field = [&](double t, const Vector& s) {
    return eval(t, ControllerState::split(s, m)).stacked();
  };

  ReducedTrajectory out;
  ControllerState z = z0;
  const long steps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9));
  for (long k = 0; k <= steps; ++k) {
    const double t = std::min(t0 + static_cast<double>(k) * dt, t1);
    const ControllerState zd = eval(t, z);
    out.t.push_back(t);
    out.z.push_back(z);
    out.zdot.push_back(zd);
    if (k == steps) break;
    const double h = std::min(dt, t1 - t);
    if (field == ReducedField::Lipschitz) {
      z = ControllerState::split(rk4_step(stacked_field, t, z.stacked(), h), m);
    } else {
      z = problem.project_feasible(
          ControllerState::split(z.stacked() + h * zd.stacked(), m));
    }
  }
  return out;
}

}  // namespace pdflow
