#include "pdflow/traffic.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "pdflow/error.hpp"
#include "pdflow/random.hpp"
#include "pdflow/simulator.hpp"

namespace pdflow {

LinkKind parse_link_kind(const std::string& name) {
  if (name == "on_ramp" || name == "onramp") return LinkKind::OnRamp;
  if (name == "off_ramp" || name == "offramp") return LinkKind::OffRamp;
  if (name == "internal") return LinkKind::Internal;
  throw Error(ErrorCode::InvalidNetwork, "unknown link kind '" + name + "'");
}

std::string to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::OnRamp: return "on_ramp";
    case LinkKind::OffRamp: return "off_ramp";
    case LinkKind::Internal: return "internal";
  }
  return "internal";
}

TrafficNetwork::TrafficNetwork(std::vector<TrafficLink> links, std::vector<RoutingEdge> edges,
                               std::vector<std::string> controllable)
    : links_(std::move(links)), edges_(std::move(edges)) {
  std::vector<std::string> problems;
  std::map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto& l = links_[i];
    const std::string tag = "link '" + l.id + "'";
    if (l.id.empty()) problems.push_back("link #" + std::to_string(i) + " has an empty id");
    if (!index.emplace(l.id, static_cast<Eigen::Index>(i)).second)
      problems.push_back("duplicate " + tag);
    for (auto [name, v] : {std::pair{"phi", l.phi}, {"beta", l.beta}, {"d_max", l.d_max},
                           {"s_max", l.s_max}, {"x_jam", l.x_jam}})
      if (!(v > 0.0)) problems.push_back(tag + ": " + name + " must be positive");
    if (l.phi > 0.0 && l.x_crit_demand() > l.x_jam)
      problems.push_back(tag + ": critical demand density exceeds jam density");
    if (l.beta > 0.0 && !(l.x_crit_supply() > 0.0))
      problems.push_back(tag + ": s_max / beta must be below x_jam");
    if (l.inflow < 0.0) problems.push_back(tag + ": inflow must be nonnegative");
  }
  if (links_.empty()) problems.push_back("network has no links");

  const auto n = static_cast<Eigen::Index>(links_.size());
  succ_.assign(links_.size(), {});
  pred_.assign(links_.size(), {});
  routing_ = Matrix::Zero(n, n);
  std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
  for (const auto& e : edges_) {
    const std::string tag = "edge " + e.from + " -> " + e.to;
    auto fi = index.find(e.from);
    auto ti = index.find(e.to);
    if (fi == index.end()) problems.push_back(tag + ": unknown source link");
    if (ti == index.end()) problems.push_back(tag + ": unknown target link");
    if (!(e.ratio > 0.0 && e.ratio <= 1.0)) problems.push_back(tag + ": ratio must be in (0, 1]");
    if (fi == index.end() || ti == index.end()) continue;
    const Eigen::Index a = fi->second;
    const Eigen::Index b = ti->second;
    if (a == b) problems.push_back(tag + ": self loop");
    if (!seen.insert({a, b}).second) problems.push_back(tag + ": duplicate edge");
    if (link(a).kind == LinkKind::OffRamp) problems.push_back(tag + ": off-ramps have no successors");
    if (link(b).kind == LinkKind::OnRamp) problems.push_back(tag + ": on-ramps have no predecessors");
    succ_[static_cast<std::size_t>(a)].push_back(b);
    pred_[static_cast<std::size_t>(b)].push_back(a);
    routing_(a, b) += e.ratio;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (succ_[static_cast<std::size_t>(i)].empty()) continue;
    const double total = routing_.row(i).sum();
    if (std::abs(total - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "link '" << link(i).id << "': routing ratios sum to " << total << ", not 1";
      problems.push_back(os.str());
    }
  }
  for (const auto& id : controllable) {
    auto it = index.find(id);
    if (it == index.end()) {
      problems.push_back("controllable ramp '" + id + "' is not a link");
      continue;
    }
    if (link(it->second).kind != LinkKind::OnRamp)
      problems.push_back("controllable ramp '" + id + "' is not an on-ramp");
    if (std::find(controllable_.begin(), controllable_.end(), it->second) != controllable_.end())
      problems.push_back("controllable ramp '" + id + "' listed twice");
    controllable_.push_back(it->second);
  }

  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " problem(s) in network";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw Error(ErrorCode::InvalidNetwork, msg);
  }
}

Eigen::Index TrafficNetwork::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < links_.size(); ++i)
    if (links_[i].id == id) return static_cast<Eigen::Index>(i);
  throw Error(ErrorCode::UnknownLink, "no link '" + id + "'");
}

const std::vector<Eigen::Index>& TrafficNetwork::successors(Eigen::Index i) const {
  return succ_.at(static_cast<std::size_t>(i));
}

const std::vector<Eigen::Index>& TrafficNetwork::predecessors(Eigen::Index i) const {
  return pred_.at(static_cast<std::size_t>(i));
}

std::vector<Eigen::Index> TrafficNetwork::off_ramps() const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < size(); ++i)
    if (link(i).kind == LinkKind::OffRamp) out.push_back(i);
  return out;
}

Vector TrafficNetwork::ceilings() const {
  Vector c(size());
  for (Eigen::Index i = 0; i < size(); ++i) c(i) = link(i).ceiling();
  return c;
}

Vector TrafficNetwork::throughput_weights() const {
  Vector c = Vector::Zero(size());
  for (Eigen::Index i : off_ramps()) c(i) = link(i).phi;
  return c;
}

bool TrafficNetwork::free_flow_consistent() const {
  for (Eigen::Index i = 0; i < size(); ++i)
    for (Eigen::Index j : successors(i))
      if (link(i).d_max > link(j).s_max / routing_(i, j)) return false;
  return true;
}

bool TrafficNetwork::same_as(const TrafficNetwork& other) const {
  if (size() != other.size() || controllable_ != other.controllable_ ||
      routing_ != other.routing_)
    return false;
  for (Eigen::Index i = 0; i < size(); ++i) {
    const auto& a = link(i);
    const auto& b = other.link(i);
    if (a.id != b.id || a.kind != b.kind || a.phi != b.phi || a.beta != b.beta ||
        a.d_max != b.d_max || a.s_max != b.s_max || a.x_jam != b.x_jam || a.inflow != b.inflow)
      return false;
  }
  return true;
}

Vector ctm_outflows(const TrafficNetwork& net, const Vector& x) {
  const auto n = net.size();
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& l = net.link(i);
    double f = l.demand(x(i));
    if (l.kind != LinkKind::OffRamp)
      for (Eigen::Index j : net.successors(i))
        f = std::min(f, net.link(j).supply(x(j)) / net.routing()(i, j));
    out(i) = f;
  }
  return out;
}

Vector ctm_field(const TrafficNetwork& net, const Vector& x, const Vector& u) {
  const auto n = net.size();
  require_size(x, n, "densities");
  require_size(u, net.ramps(), "ramp inflows");
  for (Eigen::Index i = 0; i < n; ++i)
    if (x(i) < -1e-9)
      throw Error(ErrorCode::NegativeDensity,
                  "density of '" + net.link(i).id + "' is " + std::to_string(x(i)));
  const Vector xc = x.cwiseMax(0.0);
  const Vector f_out = ctm_outflows(net, xc);
  Vector dx = -f_out;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j : net.predecessors(i)) dx(i) += net.routing()(j, i) * f_out(j);
    if (net.link(i).kind == LinkKind::OnRamp) dx(i) += net.link(i).inflow;
  }
  const auto& ctrl = net.controllable();
  for (std::size_t k = 0; k < ctrl.size(); ++k) dx(ctrl[k]) += u(static_cast<Eigen::Index>(k));
  return dx;
}

double throughput(const TrafficNetwork& net, const Vector& x) {
  double total = 0.0;
  for (Eigen::Index i : net.off_ramps()) total += net.link(i).demand(std::max(x(i), 0.0));
  return total;
}

LtiPlant freeflow_linearization(const TrafficNetwork& net) {
  const auto n = net.size();
  const auto m = net.ramps();
  Vector phi(n);
  for (Eigen::Index i = 0; i < n; ++i) phi(i) = net.link(i).phi;
  const Matrix a = (net.routing().transpose() - Matrix::Identity(n, n)) * phi.asDiagonal();
  if (!(spectral_abscissa(a) < kHurwitzMargin))
    throw Error(ErrorCode::NotHurwitz,
                "free-flow matrix (R^T - I) F is not Hurwitz; the routing traps mass");
  Matrix b = Matrix::Zero(n, m);
  for (Eigen::Index k = 0; k < m; ++k) b(net.controllable()[static_cast<std::size_t>(k)], k) = 1.0;
  return LtiPlant(a, b, Matrix::Identity(n, n), Matrix::Identity(n, n), Matrix::Zero(n, n));
}

TimeVaryingProblem build_metering_problem(const TrafficNetwork& net, const CertifiedPlant& plant,
                                          const MeteringSpec& spec) {
  const auto n = net.size();
  const auto m = net.ramps();
  require_size(spec.u_ref, m, "u_ref");
  require_shape(spec.Q_u, m, m, "Q_u");
  if ((spec.u_ref.array() < 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "u_ref must be nonnegative");
  if (!is_positive_definite(spec.Q_u))
    throw Error(ErrorCode::InvalidArgument, "Q_u must be positive definite");

  QuadraticCostSpec cs;
  cs.Q_u = 2.0 * spec.Q_u;
  cs.r_u = Signal::constant(spec.u_ref);
  cs.Q_y = 2.0 * spec.delta * Matrix::Identity(n, n);
  cs.r_y = Signal::zero(n);
  cs.c = Signal::constant(-net.throughput_weights());
  auto constraint = OutputConstraint::fixed(ConstraintKind::Inequality, Matrix::Identity(n, n),
                                            Signal::constant(net.ceilings()));
  Signal noise = spec.noise.size() == n ? spec.noise : Signal::zero(n);
  return TimeVaryingProblem(quadratic_cost(cs), std::move(constraint), InputSet::nonneg(m),
                            spec.nu, plant.map, std::move(noise));
}

Signal piecewise_linear_noise(Eigen::Index size, double amplitude, double knot_dt, double t1,
                              std::uint64_t seed) {
  if (!(knot_dt > 0.0) || !(t1 > 0.0) || amplitude < 0.0)
    throw Error(ErrorCode::InvalidArgument, "noise needs knot_dt > 0, t1 > 0, amplitude >= 0");
  std::mt19937_64 rng(seed);
  std::vector<double> times;
  std::vector<Vector> values;
  const auto knots = static_cast<long>(std::ceil(t1 / knot_dt - 1e-9));
  for (long k = 0; k <= knots; ++k) {
    times.push_back(static_cast<double>(k) * knot_dt);
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = uniform(rng, -amplitude, amplitude);
    values.push_back(std::move(v));
  }
  return Signal::table(std::move(times), std::move(values));
}

MeteringController parse_metering_controller(const std::string& name) {
  if (name == "projected_pd") return MeteringController::ProjectedPD;
  if (name == "alinea") return MeteringController::Alinea;
  if (name == "mpc") return MeteringController::Mpc;
  throw Error(ErrorCode::ConfigInvalid, "unknown metering controller '" + name + "'");
}

std::string to_string(MeteringController kind) {
  switch (kind) {
    case MeteringController::ProjectedPD: return "projected_pd";
    case MeteringController::Alinea: return "alinea";
    case MeteringController::Mpc: return "mpc";
  }
  return "projected_pd";
}

namespace {

using Clock = std::chrono::steady_clock;

long whole_steps(double span, double dt, const std::string& what) {
  const double ratio = span / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw Error(ErrorCode::InvalidArgument, what + " must be a positive multiple of dt");
  return static_cast<long>(rounded);
}

AlineaLaw make_alinea(const TrafficNetwork& net, const MeteringScenario& sc) {
  AlineaLaw law;
  const auto n = net.size();
  law.gains = sc.alinea_gains.size() == n ? sc.alinea_gains : Vector(Vector::Zero(n));
  law.setpoints = sc.alinea_setpoints.size() == n ? sc.alinea_setpoints : net.ceilings();
  if (sc.alinea_downstream.size() != static_cast<std::size_t>(net.ramps()))
    throw Error(ErrorCode::InvalidArgument, "ALINEA needs a downstream list per metered ramp");
  for (const auto& ids : sc.alinea_downstream) {
    AlineaRamp ramp;
    for (const auto& id : ids) ramp.downstream.push_back(net.index_of(id));
    law.ramps.push_back(std::move(ramp));
  }
  return law;
}

}  // namespace

MeteringRun run_metering(const TrafficNetwork& net, const MeteringScenario& sc) {
  const auto n = net.size();
  const auto m = net.ramps();
  require_size(sc.x0, n, "x0");
  require_size(sc.u0, m, "u0");
  if (!(sc.dt > 0.0) || !(sc.t1 > 0.0) || sc.log_every < 1)
    throw Error(ErrorCode::InvalidArgument, "need dt > 0, t1 > 0 and log_every >= 1");
  const long steps = whole_steps(sc.t1, sc.dt, "t1");

  const Vector ceilings = net.ceilings();
  const Signal noise = sc.spec.noise.size() == n ? sc.spec.noise : Signal::zero(n);
  const CertifiedPlant plant = certify_plant(freeflow_linearization(net));

  MeteringRun run;
  auto log = [&](double t, const Vector& x, const Vector& u) {
    run.t.push_back(t);
    run.x.push_back(x);
    run.u.push_back(u);
    run.throughput.push_back(throughput(net, x));
    run.violation.push_back((x - ceilings).cwiseMax(0.0).norm());
  };

  Vector x = sc.x0;
  Vector u = sc.u0.cwiseMax(0.0);
  Clock::duration busy{};

  switch (sc.controller) {
    case MeteringController::ProjectedPD: {
      const TimeVaryingProblem problem = build_metering_problem(net, plant, sc.spec);
      const auto r = problem.multipliers();
      auto field = [&](double t, const Vector& s) -> Vector {
        const Vector xs = s.head(n);
        const ControllerState z{s.segment(n, m), s.tail(r)};
        const Vector meas = xs + noise(t);
        const auto start = Clock::now();
        const ControllerState zd = projected_pd_field(problem, z, meas, t, sc.eta);
        busy += Clock::now() - start;
        Vector out(n + m + r);
        out << ctm_field(net, xs, z.u), sc.eps * zd.u, sc.eps * zd.lambda;
        return out;
      };
      Vector s(n + m + r);
      s << x, u, Vector::Zero(r);
      log(0.0, x, u);
      for (long k = 1; k <= steps; ++k) {
        s = rk4_step(field, static_cast<double>(k - 1) * sc.dt, s, sc.dt);
        if (!s.allFinite()) throw Error(ErrorCode::NonFiniteState, "traffic state diverged");
        if (k % sc.log_every == 0 || k == steps)
          log(static_cast<double>(k) * sc.dt, s.head(n), s.segment(n, m));
      }
      break;
    }
    case MeteringController::Alinea: {
      const AlineaLaw law = make_alinea(net, sc);
      auto field = [&](double t, const Vector& s) -> Vector {
        const Vector xs = s.head(n);
        const Vector meas = xs + noise(t);
        const auto start = Clock::now();
        const Vector ud = alinea_field(law, meas);
        busy += Clock::now() - start;
        Vector out(n + m);
        out << ctm_field(net, xs, s.tail(m).cwiseMax(0.0)), ud;
        return out;
      };
      Vector s(n + m);
      s << x, u;
      log(0.0, x, u);
      for (long k = 1; k <= steps; ++k) {
        s = rk4_step(field, static_cast<double>(k - 1) * sc.dt, s, sc.dt);
        s.tail(m) = s.tail(m).cwiseMax(0.0);
        if (!s.allFinite()) throw Error(ErrorCode::NonFiniteState, "traffic state diverged");
        if (k % sc.log_every == 0 || k == steps)
          log(static_cast<double>(k) * sc.dt, s.head(n), s.tail(m));
      }
      break;
    }
    case MeteringController::Mpc: {
      const long per_input = whole_steps(sc.mpc.dt, sc.dt, "MPC dt");
      const long per_plan = whole_steps(sc.mpc.replan, sc.dt, "MPC replan interval");
      MpcModel model{plant.plant.A(), plant.plant.B()};
      MpcObjective obj{sc.spec.Q_u, sc.spec.u_ref, net.throughput_weights(), sc.spec.delta,
                       ceilings};
      MpcPlan plan;
      auto field = [&](double, const Vector& xs) -> Vector { return ctm_field(net, xs, u); };
      log(0.0, x, u);
      for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * sc.dt;
        const long in_plan = k % per_plan;
        if (in_plan == 0) {
          const Vector meas = x + noise(t);
          const auto start = Clock::now();
          plan = mpc_policy(model, obj, meas, sc.mpc);
          busy += Clock::now() - start;
          if (plan.softened) ++run.softened_plans;
        }
        const auto idx = static_cast<std::size_t>(in_plan / per_input);
        u = plan.inputs[std::min(idx, plan.inputs.size() - 1)];
        if (k == 0) run.u.front() = u;
        x = rk4_step(field, t, x, sc.dt);
        if (!x.allFinite()) throw Error(ErrorCode::NonFiniteState, "traffic state diverged");
        if ((k + 1) % sc.log_every == 0 || k + 1 == steps)
          log(static_cast<double>(k + 1) * sc.dt, x, u);
      }
      break;
    }
  }

  run.compute_seconds = std::chrono::duration<double>(busy).count();
  double tp = 0.0, vi = 0.0;
  for (std::size_t i = 1; i < run.t.size(); ++i) {
    const double h = run.t[i] - run.t[i - 1];
    tp += 0.5 * h * (run.throughput[i] + run.throughput[i - 1]);
    vi += 0.5 * h * (run.violation[i] + run.violation[i - 1]);
  }
  run.mean_throughput = tp / sc.t1;
  run.violation_integral = vi;
  run.min_input = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    run.max_violation = std::max(run.max_violation, run.violation[i]);
    if (run.t[i] >= sc.transient)
      run.max_violation_post_transient = std::max(run.max_violation_post_transient, run.violation[i]);
    run.min_input = std::min(run.min_input, run.u[i].minCoeff());
  }
  return run;
}

}  // namespace pdflow
