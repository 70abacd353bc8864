#include "pdflow/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pdflow/error.hpp"

namespace pdflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

const json& req(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) invalid(ctx + ": missing '" + key + "'");
  return j.at(key);
}

double num(const json& j, const std::string& ctx) {
  if (!j.is_number()) invalid(ctx + ": expected a number");
  return j.get<double>();
}

double num_or(const json& j, const char* key, double fallback, const std::string& ctx) {
  return j.contains(key) ? num(j.at(key), ctx + "." + key) : fallback;
}

Vector vec(const json& j, const std::string& ctx) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array()) invalid(ctx + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = num(j[i], ctx + "[" + std::to_string(i) + "]");
  return v;
}

/// Nested row-major arrays, a bare number (1x1), {"zeros": [r, c]} or
/// {"identity": n}.
Matrix mat(const json& j, const std::string& ctx) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (j.is_object()) {
    if (j.contains("zeros")) {
      const auto& d = j.at("zeros");
      if (!d.is_array() || d.size() != 2) invalid(ctx + ": zeros needs [rows, cols]");
      return Matrix::Zero(d[0].get<Eigen::Index>(), d[1].get<Eigen::Index>());
    }
    if (j.contains("identity")) {
      const auto k = j.at("identity").get<Eigen::Index>();
      return Matrix::Identity(k, k);
    }
    invalid(ctx + ": unknown matrix form");
  }
  if (!j.is_array() || j.empty()) invalid(ctx + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) invalid(ctx + ": rows must be arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      invalid(ctx + ": ragged matrix at row " + std::to_string(i));
    for (Eigen::Index c = 0; c < cols; ++c)
      m(i, c) = num(row[static_cast<std::size_t>(c)], ctx);
  }
  return m;
}

Signal signal(const json& j, Eigen::Index size, const std::string& ctx) {
  Signal s;
  if (j.is_null()) {
    s = Signal::zero(size);
  } else if (j.is_array() || j.is_number()) {
    s = Signal::constant(vec(j, ctx));
  } else if (j.contains("constant")) {
    s = Signal::constant(vec(j.at("constant"), ctx + ".constant"));
  } else if (j.contains("sinusoid")) {
    const auto& p = j.at("sinusoid");
    const std::string c = ctx + ".sinusoid";
    s = Signal::sinusoid(vec(req(p, "amplitude", c), c + ".amplitude"),
                         num(req(p, "frequency", c), c + ".frequency"), num_or(p, "phase", 0.0, c),
                         p.contains("offset") ? vec(p.at("offset"), c + ".offset")
                                              : Vector(Vector::Zero(size)));
  } else if (j.contains("table")) {
    const auto& p = j.at("table");
    const std::string c = ctx + ".table";
    const auto& ts = req(p, "t", c);
    const auto& vs = req(p, "values", c);
    if (!ts.is_array() || !vs.is_array() || ts.size() != vs.size())
      invalid(c + ": 't' and 'values' must be arrays of equal length");
    std::vector<double> times;
    std::vector<Vector> values;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      times.push_back(num(ts[i], c + ".t"));
      values.push_back(vec(vs[i], c + ".values"));
    }
    s = Signal::table(std::move(times), std::move(values));
  } else {
    invalid(ctx + ": signal must be an array or {constant|sinusoid|table}");
  }
  if (s.size() != size)
    invalid(ctx + ": signal has size " + std::to_string(s.size()) + ", expected " +
            std::to_string(size));
  return s;
}

InputSet input_set(const json& j, Eigen::Index m, const std::string& ctx) {
  if (j.is_null()) return InputSet::full(m);
  const auto kind = InputSet::parse_kind(req(j, "kind", ctx).get<std::string>());
  switch (kind) {
    case InputSet::Kind::Box:
      return InputSet::box(vec(req(j, "lower", ctx), ctx + ".lower"),
                           vec(req(j, "upper", ctx), ctx + ".upper"));
    case InputSet::Kind::NonnegOrthant: return InputSet::nonneg(m);
    case InputSet::Kind::Ball:
      return InputSet::ball(vec(req(j, "center", ctx), ctx + ".center"),
                            num(req(j, "radius", ctx), ctx + ".radius"));
    case InputSet::Kind::FullSpace: return InputSet::full(m);
  }
  return InputSet::full(m);
}

json at_or_null(const json& j, const char* key) { return j.contains(key) ? j.at(key) : json(); }

LtiExperiment parse_lti(const json& root) {
  const auto& pj = req(root, "plant", "config");
  LtiPlant lti(mat(req(pj, "A", "plant"), "plant.A"), mat(req(pj, "B", "plant"), "plant.B"),
               mat(req(pj, "C", "plant"), "plant.C"), mat(req(pj, "D", "plant"), "plant.D"),
               mat(req(pj, "E", "plant"), "plant.E"));
  std::optional<Matrix> q_x;
  if (pj.contains("Q_x")) q_x = mat(pj.at("Q_x"), "plant.Q_x");
  CertifiedPlant plant = certify_plant(lti, q_x);

  const auto m = lti.inputs();
  const auto p = lti.outputs();
  const auto q = lti.disturbances();
  const auto& prob = req(root, "problem", "config");
  const auto& cj = req(prob, "cost", "problem");
  QuadraticCostSpec cs;
  cs.Q_u = mat(req(cj, "Q_u", "cost"), "cost.Q_u");
  cs.r_u = signal(at_or_null(cj, "r_u"), m, "cost.r_u");
  cs.Q_y = cj.contains("Q_y") ? mat(cj.at("Q_y"), "cost.Q_y") : Matrix(Matrix::Zero(p, p));
  cs.r_y = signal(at_or_null(cj, "r_y"), p, "cost.r_y");
  cs.c = signal(at_or_null(cj, "c"), p, "cost.c");

  OutputConstraint constraint = OutputConstraint::none(p);
  const json con = at_or_null(prob, "constraint");
  const std::string kind = con.is_null() ? "none" : req(con, "kind", "constraint").get<std::string>();
  const double horizon = num_or(at_or_null(root, "simulation"), "t1", 100.0, "simulation");
  if (kind == "inequality" || kind == "equality") {
    Matrix K = mat(req(con, "K", "constraint"), "constraint.K");
    constraint = OutputConstraint::fixed(
        kind == "inequality" ? ConstraintKind::Inequality : ConstraintKind::Equality, K,
        signal(req(con, "e", "constraint"), K.rows(), "constraint.e"), horizon);
  } else if (kind != "none") {
    invalid("constraint.kind must be inequality, equality or none");
  }
  const bool equality = constraint.kind == ConstraintKind::Equality;
  TimeVaryingProblem problem(quadratic_cost(cs), constraint,
                             input_set(at_or_null(prob, "input_set"), m, "problem.input_set"),
                             num_or(prob, "nu", 0.0, "problem"), plant.map,
                             signal(at_or_null(prob, "disturbance"), q, "problem.disturbance"));

  SimulationOptions sim;
  const auto& ctl = req(root, "controller", "config");
  const std::string type = req(ctl, "type", "controller").get<std::string>();
  sim.gains.eps = num(req(ctl, "eps", "controller"), "controller.eps");
  if (type == "projected_pd") {
    if (equality) invalid("projected_pd needs an inequality (or no) constraint");
    sim.controller = ControllerKind::ProjectedPD;
    sim.gains.eta = num(req(ctl, "eta", "controller"), "controller.eta");
  } else if (type == "equality_pd") {
    if (!equality) invalid("equality_pd needs an equality constraint");
    sim.controller = ControllerKind::EqualityPD;
    sim.gains.eta_u = num(req(ctl, "eta_u", "controller"), "controller.eta_u");
    sim.gains.eta_lambda = num(req(ctl, "eta_lambda", "controller"), "controller.eta_lambda");
  } else {
    invalid("controller.type must be projected_pd or equality_pd for an LTI plant");
  }

  const auto& sj = req(root, "simulation", "config");
  sim.t0 = num_or(sj, "t0", 0.0, "simulation");
  sim.t1 = num(req(sj, "t1", "simulation"), "simulation.t1");
  sim.dt = num(req(sj, "dt", "simulation"), "simulation.dt");
  sim.log_every = static_cast<int>(num_or(sj, "log_every", 10, "simulation"));
  sim.oracle_tol = num_or(sj, "oracle_tol", 1e-10, "simulation");
  if (!(sim.dt > 0.0) || sim.dt > sim.gains.eps / 10.0 * (1.0 + 1e-12))
    invalid("simulation.dt = " + std::to_string(sim.dt) + " must be in (0, eps/10]");
  if (!(sim.t1 >= sim.t0)) invalid("simulation.t1 must not precede t0");
  if (sim.log_every < 1) invalid("simulation.log_every must be >= 1");

  const json init = at_or_null(sj, "initial");
  ControllerState z0;
  z0.u = init.contains("u") ? vec(init.at("u"), "initial.u")
                            : problem.input_set().project(Vector::Zero(m));
  z0.lambda = init.contains("lambda") ? vec(init.at("lambda"), "initial.lambda")
                                      : Vector(Vector::Zero(problem.multipliers()));
  if (z0.u.size() != m || z0.lambda.size() != problem.multipliers())
    invalid("initial u / lambda have the wrong size");
  Vector x0;
  if (!init.contains("x") || (init.at("x").is_string() && init.at("x") == "rest")) {
    x0 = lti.equilibrium(z0.u, problem.disturbance()(sim.t0));
  } else {
    x0 = vec(init.at("x"), "initial.x");
    if (x0.size() != lti.states()) invalid("initial.x has the wrong size");
  }
  return LtiExperiment{std::move(plant), std::move(problem), sim, std::move(x0), std::move(z0)};
}

TrafficNetwork parse_network(const json& j) {
  std::vector<TrafficLink> links;
  for (const auto& lj : req(j, "links", "network")) {
    TrafficLink l;
    const std::string c = "network.links";
    l.id = req(lj, "id", c).get<std::string>();
    l.kind = parse_link_kind(req(lj, "kind", c).get<std::string>());
    l.phi = num(req(lj, "phi", c), c + ".phi");
    l.beta = num(req(lj, "beta", c), c + ".beta");
    l.d_max = num(req(lj, "d_max", c), c + ".d_max");
    l.s_max = num(req(lj, "s_max", c), c + ".s_max");
    l.x_jam = num(req(lj, "x_jam", c), c + ".x_jam");
    l.inflow = num_or(lj, "inflow", 0.0, c);
    links.push_back(std::move(l));
  }
  std::vector<RoutingEdge> edges;
  for (const auto& ej : req(j, "edges", "network"))
    edges.push_back({req(ej, "from", "edge").get<std::string>(),
                     req(ej, "to", "edge").get<std::string>(), num(req(ej, "ratio", "edge"), "ratio")});
  std::vector<std::string> ctrl = req(j, "controllable", "network").get<std::vector<std::string>>();
  return TrafficNetwork(std::move(links), std::move(edges), std::move(ctrl));
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    invalid("'" + path + "': " + e.what());
  }
}

/// Vector given as an array in link order or as an object keyed by link id.
Vector per_link(const json& j, const TrafficNetwork& net, double fallback, const std::string& ctx) {
  if (j.is_null()) return Vector::Constant(net.size(), fallback);
  if (j.is_object()) {
    Vector v = Vector::Constant(net.size(), fallback);
    for (auto it = j.begin(); it != j.end(); ++it) v(net.index_of(it.key())) = num(it.value(), ctx);
    return v;
  }
  Vector v = vec(j, ctx);
  if (v.size() != net.size()) invalid(ctx + ": expected one value per link");
  return v;
}

TrafficExperiment parse_traffic(const json& root, const std::string& base_dir,
                                std::uint64_t seed) {
  std::optional<TrafficNetwork> net;
  if (root.contains("network_file")) {
    fs::path p = root.at("network_file").get<std::string>();
    if (p.is_relative()) p = fs::path(base_dir) / p;
    net.emplace(load_network(p.string()));
  } else {
    net.emplace(parse_network(req(root, "network", "config")));
  }
  const auto n = net->size();
  const auto m = net->ramps();

  MeteringScenario sc;
  const auto& mj = req(root, "metering", "config");
  sc.spec.u_ref = vec(req(mj, "u_ref", "metering"), "metering.u_ref");
  sc.spec.Q_u = mat(req(mj, "Q_u", "metering"), "metering.Q_u");
  sc.spec.nu = num_or(mj, "nu", sc.spec.nu, "metering");
  sc.spec.delta = num_or(mj, "delta", sc.spec.delta, "metering");

  const auto& sj = req(root, "simulation", "config");
  sc.t1 = num(req(sj, "t1", "simulation"), "simulation.t1");
  sc.dt = num(req(sj, "dt", "simulation"), "simulation.dt");
  sc.log_every = static_cast<int>(num_or(sj, "log_every", 10, "simulation"));
  sc.transient = num_or(sj, "transient", 0.25 * sc.t1, "simulation");
  sc.x0 = per_link(at_or_null(sj, "x0"), *net, 0.0, "simulation.x0");
  sc.u0 = sj.contains("u0") ? vec(sj.at("u0"), "simulation.u0") : Vector(Vector::Zero(m));
  if (sc.u0.size() != m) invalid("simulation.u0 needs one value per metered ramp");

  if (mj.contains("noise") && !mj.at("noise").is_null()) {
    const auto& nj = mj.at("noise");
    const auto s = nj.contains("seed") ? nj.at("seed").get<std::uint64_t>() : seed;
    sc.spec.noise = piecewise_linear_noise(n, num(req(nj, "amplitude", "noise"), "noise.amplitude"),
                                           num(req(nj, "knot_dt", "noise"), "noise.knot_dt"),
                                           sc.t1, s);
  }

  const auto& cj = req(root, "controller", "config");
  sc.controller = parse_metering_controller(req(cj, "type", "controller").get<std::string>());
  switch (sc.controller) {
    case MeteringController::ProjectedPD:
      sc.eta = num(req(cj, "eta", "controller"), "controller.eta");
      sc.eps = num(req(cj, "eps", "controller"), "controller.eps");
      break;
    case MeteringController::Alinea: {
      sc.alinea_gains = per_link(req(cj, "gains", "controller"), *net, 0.0, "controller.gains");
      if (cj.contains("setpoints"))
        sc.alinea_setpoints = per_link(cj.at("setpoints"), *net, 0.0, "controller.setpoints");
      const auto& ds = req(cj, "downstream", "controller");
      if (!ds.is_array()) invalid("controller.downstream must list link ids per ramp");
      for (const auto& d : ds) sc.alinea_downstream.push_back(d.get<std::vector<std::string>>());
      break;
    }
    case MeteringController::Mpc:
      sc.mpc.horizon = num_or(cj, "horizon", sc.mpc.horizon, "controller");
      sc.mpc.replan = num_or(cj, "replan", sc.mpc.replan, "controller");
      sc.mpc.dt = num_or(cj, "dt", sc.mpc.dt, "controller");
      sc.mpc.tol = num_or(cj, "tol", sc.mpc.tol, "controller");
      sc.mpc.max_iterations =
          static_cast<long>(num_or(cj, "max_iterations", static_cast<double>(sc.mpc.max_iterations),
                                   "controller"));
      sc.mpc.soft_penalty = num_or(cj, "soft_penalty", sc.mpc.soft_penalty, "controller");
      break;
  }
  return TrafficExperiment{std::move(*net), std::move(sc)};
}

}  // namespace

TrafficNetwork load_network(const std::string& path) {
  const json j = read_json(path);
  try {
    return parse_network(j);
  } catch (const json::exception& e) {
    invalid("'" + path + "': " + e.what());
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::exception& e) {
    invalid(e.what());
  }
  if (!root.is_object()) invalid("top level must be an object");
  try {
    const std::string name = req(root, "scenario", "config").get<std::string>();
    const auto seed = root.value("seed", std::uint64_t{0});
    const std::string kind = root.value("kind", std::string("lti"));
    auto body = [&]() -> std::variant<LtiExperiment, TrafficExperiment> {
      if (kind == "lti") return parse_lti(root);
      if (kind == "traffic") {
        TrafficExperiment t = parse_traffic(root, base_dir, seed);
        t.scenario.name = name;
        return t;
      }
      invalid("kind must be 'lti' or 'traffic'");
    }();
    return ExperimentConfig{name, "", root.value("output_dir", std::string()), seed,
                            std::move(body)};
  } catch (const json::exception& e) {
    invalid(e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const fs::path base = fs::path(path).parent_path();
  ExperimentConfig cfg = parse_config(ss.str(), base.empty() ? "." : base.string());
  cfg.source = path;
  return cfg;
}

AnyCertificate certify_experiment(const LtiExperiment& exp) {
  const auto& g = exp.sim.gains;
  if (exp.problem.kind() == ConstraintKind::Equality)
    return certify_equality(exp.plant, exp.problem, g.eta_u, g.eta_lambda, g.eps);
  return certify_inequality(exp.plant, exp.problem, g.eta, g.eps);
}

namespace {

json to_json(const CertificateReport& r) {
  return json{{"track", "inequality"},
              {"eta", r.eta},
              {"eps", r.eps},
              {"ell", r.ell},
              {"mu", r.mu},
              {"rho_z", r.rho_z},
              {"eta_max", r.eta_max},
              {"k0", r.k0},
              {"Psi", r.Psi},
              {"eps_max", r.eps_max},
              {"rho_xi", r.rho_xi},
              {"rho_xi_proof", r.rho_xi_proof},
              {"kappa", r.kappa},
              {"gamma_z", r.gamma_z},
              {"gamma_w", r.gamma_w},
              {"b", r.b},
              {"g", r.g},
              {"d", r.d},
              {"theta", r.theta},
              {"norm_G", r.norm_G},
              {"norm_C", r.norm_C},
              {"norm_PAinvB", r.norm_PAinvB},
              {"norm_PAinvE", r.norm_PAinvE},
              {"lambda_max_P", r.lambda_max_P},
              {"lambda_min_P", r.lambda_min_P},
              {"lambda_min_Q", r.lambda_min_Q},
              {"eta_ok", r.eta_ok},
              {"eps_ok", r.eps_ok},
              {"pass", r.pass()}};
}

json to_json(const EqualityCertificate& c) {
  json pz = json::array();
  for (Eigen::Index i = 0; i < c.P_z.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < c.P_z.cols(); ++k) row.push_back(c.P_z(i, k));
    pz.push_back(row);
  }
  return json{{"track", "equality"},
              {"eta_u", c.eta_u},
              {"eta_lambda", c.eta_lambda},
              {"eps", c.eps},
              {"ell", c.ell},
              {"k_lo", c.k_lo},
              {"k_hi", c.k_hi},
              {"ratio_required", c.ratio_required},
              {"P_z", pz},
              {"lambda_min_Pz", c.lambda_min_Pz},
              {"lambda_max_Pz", c.lambda_max_Pz},
              {"norm_Pz", c.norm_Pz},
              {"rho_z", c.rho_z},
              {"sigma1", c.sigma1},
              {"sigma2", c.sigma2},
              {"sigma3", c.sigma3},
              {"eps_max", c.eps_max},
              {"rho_xi", c.rho_xi},
              {"kappa", c.kappa},
              {"gamma_z", c.gamma_z},
              {"gamma_w", c.gamma_w},
              {"theta", c.theta},
              {"lambda_max_P", c.lambda_max_P},
              {"lambda_min_P", c.lambda_min_P},
              {"lambda_min_Q", c.lambda_min_Q},
              {"eps_ok", c.eps_ok},
              {"pass", c.pass()}};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string certificate_json(const AnyCertificate& cert) {
  return std::visit([](const auto& c) { return to_json(c).dump(2); }, cert);
}

std::string certificate_text(const AnyCertificate& cert) {
  const json j = std::visit([](const auto& c) { return to_json(c); }, cert);
  std::ostringstream os;
  os << j.at("track").get<std::string>() << " certificate: "
     << (j.at("pass").get<bool>() ? "PASS" : "FAIL") << "\n";
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "track" || it.key() == "pass" || it.key() == "P_z") continue;
    os << "  " << it.key() << " = ";
    if (it.value().is_boolean())
      os << (it.value().get<bool>() ? "yes" : "no");
    else
      os << fmt(it.value().get<double>());
    os << "\n";
  }
  return os.str();
}

LtiRunResult run_lti(const LtiExperiment& exp) {
  LtiRunResult out{certify_experiment(exp), {}, {}, {}, 0};
  SimulationOptions sim = exp.sim;
  sim.diagnostics = std::visit([&](const auto& c) { return diagnostics_for(exp.plant, c); },
                               out.certificate);
  out.log = integrate(exp.plant, exp.problem, exp.x0, exp.z0, sim);
  out.tracking = tracking_report(out.log);
  out.lyapunov = lyapunov_diagnostics(out.log);
  for (const auto& rec : out.log.records)
    if (rec.err > rec.envelope) ++out.envelope_violations;
  return out;
}

CompareRow summarize(const std::string& scenario, const MeteringScenario& sc,
                     const MeteringRun& run) {
  return {scenario,
          to_string(sc.controller),
          run.mean_throughput,
          run.max_violation,
          run.max_violation_post_transient,
          run.violation_integral,
          run.compute_seconds};
}

std::vector<CompareRow> compare_traffic(const std::vector<ExperimentConfig>& configs) {
  if (configs.empty()) throw Error(ErrorCode::IncompatibleScenarios, "no scenarios given");
  for (const auto& c : configs)
    if (!c.is_traffic())
      throw Error(ErrorCode::IncompatibleScenarios, "'" + c.name + "' is not a traffic scenario");
  const auto& first = std::get<TrafficExperiment>(configs.front().body);
  for (const auto& c : configs) {
    const auto& t = std::get<TrafficExperiment>(c.body);
    if (!t.network.same_as(first.network))
      throw Error(ErrorCode::IncompatibleScenarios,
                  "'" + c.name + "' uses a different network than '" + configs.front().name + "'");
    if (t.scenario.t1 != first.scenario.t1)
      throw Error(ErrorCode::IncompatibleScenarios,
                  "'" + c.name + "' has a different horizon than '" + configs.front().name + "'");
  }
  std::vector<CompareRow> rows;
  for (const auto& c : configs) {
    const auto& t = std::get<TrafficExperiment>(c.body);
    rows.push_back(summarize(c.name, t.scenario, run_metering(t.network, t.scenario)));
  }
  return rows;
}

void write_metering_csv(const TrafficNetwork& net, const MeteringRun& run,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + path + " for writing");
  out << "# t: time\n";
  for (const auto& l : net.links()) out << "# x_" << l.id << ": density of " << l.id << "\n";
  for (Eigen::Index k : net.controllable())
    out << "# u_" << net.link(k).id << ": metered inflow of " << net.link(k).id << "\n";
  out << "# throughput: total off-ramp exit flow\n"
      << "# violation: ||max(0, x - ceiling)||\n";
  out << "t";
  for (const auto& l : net.links()) out << ",x_" << l.id;
  for (Eigen::Index k : net.controllable()) out << ",u_" << net.link(k).id;
  out << ",throughput,violation\n";
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    out << fmt(run.t[i]);
    for (Eigen::Index k = 0; k < run.x[i].size(); ++k) out << ',' << fmt(run.x[i](k));
    for (Eigen::Index k = 0; k < run.u[i].size(); ++k) out << ',' << fmt(run.u[i](k));
    out << ',' << fmt(run.throughput[i]) << ',' << fmt(run.violation[i]) << '\n';
  }
}

}  // namespace pdflow
