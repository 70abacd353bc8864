#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "pdflow/traffic.hpp"

using namespace pdflow;
using pdflow::test::code_of;

namespace {

TrafficLink make_link(const std::string& id, LinkKind kind, double d_max, double s_max,
                      double x_jam) {
  TrafficLink l;
  l.id = id;
  l.kind = kind;
  l.phi = 0.5;
  l.beta = 0.25;
  l.d_max = d_max;
  l.s_max = s_max;
  l.x_jam = x_jam;
  return l;
}

// on -> m -> off, m's capacity below the ramp's.
TrafficNetwork chain() {
  return TrafficNetwork({make_link("on", LinkKind::OnRamp, 10, 10, 60),
                         make_link("m", LinkKind::Internal, 8, 12, 68),
                         make_link("off", LinkKind::OffRamp, 10, 10, 60)},
                        {{"on", "m", 1.0}, {"m", "off", 1.0}}, {"on"});
}

MeteringScenario chain_scenario(MeteringController kind) {
  MeteringScenario sc;
  sc.controller = kind;
  sc.spec.u_ref = Vector::Constant(1, 6.0);
  sc.spec.Q_u = Matrix::Constant(1, 1, 4.0);
  sc.spec.nu = 0.02;
  sc.x0 = Vector::Zero(3);
  sc.u0 = Vector::Zero(1);
  sc.t1 = 60.0;
  sc.dt = 0.01;
  sc.transient = 30.0;
  sc.eta = 0.5;
  sc.eps = 0.2;
  sc.alinea_gains = (Vector(3) << 0.0, 0.08, 0.0).finished();
  sc.alinea_downstream = {{"m"}};
  return sc;
}

}  // namespace

TEST(Link, CriticalDensitiesAndCeiling) {
  const TrafficLink l = make_link("a", LinkKind::Internal, 10.5, 13, 72);
  EXPECT_NEAR(l.x_crit_demand(), 21.0, 1e-12);
  EXPECT_NEAR(l.x_crit_supply(), 20.0, 1e-12);
  EXPECT_NEAR(l.ceiling(), 20.0, 1e-12);
  EXPECT_NEAR(l.demand(30.0), 10.5, 1e-12);
  EXPECT_NEAR(l.supply(70.0), 0.5, 1e-12);
}

TEST(Network, ValidationCollectsProblems) {
  try {
    TrafficNetwork({make_link("a", LinkKind::OnRamp, 10, 10, 60),
                    make_link("b", LinkKind::Internal, 10, 10, 60)},
                   {{"a", "b", 0.6}, {"a", "zz", 0.4}}, {"b"});
    FAIL() << "expected InvalidNetwork";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidNetwork);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("unknown target"), std::string::npos);
    EXPECT_NE(msg.find("not an on-ramp"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { parse_link_kind("ramp"); }), ErrorCode::InvalidNetwork);
  EXPECT_EQ(code_of([] { chain().index_of("nope"); }), ErrorCode::UnknownLink);
}

TEST(Network, Structure) {
  const TrafficNetwork net = chain();
  EXPECT_EQ(net.size(), 3);
  EXPECT_EQ(net.ramps(), 1);
  EXPECT_EQ(net.off_ramps(), std::vector<Eigen::Index>{2});
  EXPECT_EQ(net.throughput_weights(), (Vector(3) << 0.0, 0.0, 0.5).finished());
  EXPECT_TRUE(net.free_flow_consistent());
  EXPECT_TRUE(net.same_as(chain()));
}

TEST(Ctm, SupplyLimitsUpstreamOutflow) {
  const TrafficNetwork net = chain();
  const Vector x = (Vector(3) << 40.0, 66.0, 0.0).finished();
  const Vector f = ctm_outflows(net, x);
  EXPECT_NEAR(f(0), 0.25 * (68.0 - 66.0), 1e-12);
  EXPECT_NEAR(f(1), 8.0, 1e-12);
  const Vector dx = ctm_field(net, x, Vector::Constant(1, 1.0));
  EXPECT_NEAR(dx(0), 1.0 - 0.5, 1e-12);
  EXPECT_NEAR(dx(1), 0.5 - 8.0, 1e-12);
  EXPECT_NEAR(dx(2), 8.0, 1e-12);
  EXPECT_NEAR(throughput(net, x), 0.0, 1e-12);
  EXPECT_EQ(code_of([&] { ctm_field(net, (Vector(3) << -1.0, 0.0, 0.0).finished(), Vector::Zero(1)); }),
            ErrorCode::NegativeDensity);
}

TEST(Ctm, MatchesLinearizationInFreeFlow) {
  const TrafficNetwork net = chain();
  const LtiPlant lin = freeflow_linearization(net);
  const Vector x = (Vector(3) << 3.0, 10.0, 5.0).finished();
  const Vector u = Vector::Constant(1, 2.0);
  EXPECT_LT((ctm_field(net, x, u) - (lin.A() * x + lin.B() * u)).norm(), 1e-12);
}

TEST(Noise, SeededAndBounded) {
  const Signal a = piecewise_linear_noise(3, 2.0, 5.0, 100.0, 7);
  const Signal b = piecewise_linear_noise(3, 2.0, 5.0, 100.0, 7);
  const Signal c = piecewise_linear_noise(3, 2.0, 5.0, 100.0, 8);
  EXPECT_EQ(a(12.3), b(12.3));
  EXPECT_NE(a(12.3), c(12.3));
  for (double t = 0.0; t <= 100.0; t += 0.7) EXPECT_LE(a(t).cwiseAbs().maxCoeff(), 2.0);
  EXPECT_EQ(code_of([] { piecewise_linear_noise(3, 1.0, 0.0, 10.0, 1); }),
            ErrorCode::InvalidArgument);
}

TEST(Metering, ProblemSetup) {
  const TrafficNetwork net = chain();
  const CertifiedPlant plant = certify_plant(freeflow_linearization(net));
  MeteringSpec spec;
  spec.u_ref = Vector::Constant(1, 6.0);
  spec.Q_u = Matrix::Constant(1, 1, 4.0);
  const TimeVaryingProblem p = build_metering_problem(net, plant, spec);
  EXPECT_EQ(p.inputs(), 1);
  EXPECT_EQ(p.multipliers(), 3);
  spec.Q_u = Matrix::Constant(1, 1, -1.0);
  EXPECT_EQ(code_of([&] { build_metering_problem(net, plant, spec); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_metering_controller("pid"); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(parse_metering_controller("mpc"), MeteringController::Mpc);
}

TEST(Metering, ClosedLoopsStayNonnegative) {
  const TrafficNetwork net = chain();
  for (auto kind : {MeteringController::ProjectedPD, MeteringController::Alinea,
                    MeteringController::Mpc}) {
    const MeteringRun run = run_metering(net, chain_scenario(kind));
    ASSERT_FALSE(run.t.empty());
    EXPECT_GE(run.min_input, -1e-9) << to_string(kind);
    for (const auto& x : run.x) EXPECT_GE(x.minCoeff(), -1e-9);
    EXPECT_GT(run.mean_throughput, 0.0);
    if (kind != MeteringController::Alinea)
      EXPECT_LT(run.max_violation_post_transient, 1.0) << to_string(kind);
    EXPECT_GE(run.compute_seconds, 0.0);
  }
}
