#include <benchmark/benchmark.h>

#include <string>
#include <variant>

#include "pdflow/experiment.hpp"
#include "pdflow/simulator.hpp"
#include "pdflow/traffic.hpp"

using namespace pdflow;

namespace {

const std::string kConfigs = PDFLOW_CONFIG_DIR;

LtiExperiment lti(const std::string& name) {
  return std::get<LtiExperiment>(load_config(kConfigs + "/" + name + ".json").body);
}

TrafficExperiment traffic(const std::string& name) {
  return std::get<TrafficExperiment>(load_config(kConfigs + "/traffic/" + name + ".json").body);
}

void BM_SaddleOracle(benchmark::State& state) {
  const auto exp = lti("two_link");
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_saddle_point(exp.problem, exp.plant.plant, t));
    t += 0.1;
  }
}
BENCHMARK(BM_SaddleOracle);

void BM_ClosedLoopRk4(benchmark::State& state) {
  const auto exp = lti("two_link");
  const LtiPlant& p = exp.plant.plant;
  const auto& g = exp.sim.gains;
  const auto m = exp.problem.inputs();
  const auto r = exp.problem.multipliers();
  const auto n = p.states();
  auto field = [&](double t, const Vector& s) -> Vector {
    const Vector x = s.head(n);
    const ControllerState z{s.segment(n, m), s.tail(r)};
    const Vector w = exp.problem.disturbance()(t);
    const ControllerState zd = projected_pd_field(exp.problem, z, p.output(x, w), t, g.eta);
    Vector out(n + m + r);
    out << p.vector_field(x, z.u, w, g.eps), zd.u, zd.lambda;
    return out;
  };
  Vector s(n + m + r);
  s << exp.x0, exp.z0.u, exp.z0.lambda;
  double t = 0.0;
  for (auto _ : state) {
    s = rk4_step(field, t, s, exp.sim.dt);
    t += exp.sim.dt;
    benchmark::DoNotOptimize(s.data());
  }
}
BENCHMARK(BM_ClosedLoopRk4);

void BM_CtmField(benchmark::State& state) {
  const TrafficNetwork net = load_network(kConfigs + "/traffic/network_7link.json");
  const Vector x = 0.5 * net.ceilings();
  const Vector u = Vector::Constant(net.ramps(), 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(ctm_field(net, x, u));
}
BENCHMARK(BM_CtmField);

void BM_MpcSolve(benchmark::State& state) {
  const auto exp = traffic("mpc");
  const LtiPlant lin = freeflow_linearization(exp.network);
  const MpcModel model{lin.A(), lin.B()};
  const auto& spec = exp.scenario.spec;
  const MpcObjective obj{spec.Q_u, spec.u_ref, exp.network.throughput_weights(), spec.delta,
                         exp.network.ceilings()};
  const Vector x = 0.5 * exp.network.ceilings();
  for (auto _ : state) benchmark::DoNotOptimize(mpc_policy(model, obj, x, exp.scenario.mpc));
}
BENCHMARK(BM_MpcSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
