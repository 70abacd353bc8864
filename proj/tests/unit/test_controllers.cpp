#include <gtest/gtest.h>

#include "common.hpp"
#include "pdflow/controllers.hpp"

using namespace pdflow;
using pdflow::test::code_of;
using pdflow::test::scalar;

TEST(ProjectedPD, VanishesAtSaddlePoint) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 0.5);
  const SaddlePoint sp = solve_saddle_point(problem, plant.plant, 0.0);
  const Vector y = plant.plant.output(sp.x, Vector::Zero(1));
  const ControllerState zd = projected_pd_field(problem, sp.z(), y, 0.0, 0.2);
  EXPECT_LT(zd.u.norm() + zd.lambda.norm(), 1e-10);
}

TEST(ProjectedPD, KeepsMultiplierNonnegative) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 0.5);
  const ControllerState z{Vector::Zero(1), Vector::Zero(1)};
  const ControllerState zd = projected_pd_field(problem, z, Vector::Constant(1, -3.0), 0.0, 0.2);
  EXPECT_EQ(zd.lambda(0), 0.0);
  EXPECT_NEAR(zd.u(0), 0.2 * 2.0, 1e-12);
}

TEST(DiscontinuousField, InteriorMatchesNegativeGradient) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 0.5);
  const ControllerState z{Vector::Constant(1, 0.3), Vector::Constant(1, 1.0)};
  const Vector y = Vector::Constant(1, 0.3);
  const auto g = problem.modified_gradients(z.u, y, z.lambda, 0.0);
  const ControllerState d = discontinuous_projected_field(problem, z, y, 0.0, 0.4);
  EXPECT_NEAR(d.u(0), -0.4 * g.L_u(0), 1e-8);
  EXPECT_NEAR(d.lambda(0), 0.4 * g.L_lambda(0), 1e-8);
}

TEST(DiscontinuousField, TangentConeAtBoundary) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 0.5, Signal::zero(1),
                                            InputSet::box(Vector::Zero(1), Vector::Ones(1)));
  const ControllerState z{Vector::Zero(1), Vector::Zero(1)};
  const ControllerState d = discontinuous_projected_field(problem, z, Vector::Constant(1, -1.0),
                                                          0.0, 0.4);
  EXPECT_GT(d.u(0), 0.0);
  EXPECT_EQ(d.lambda(0), 0.0);
  EXPECT_EQ(code_of([&] {
              discontinuous_projected_field(problem, z, Vector::Zero(1), 0.0, 0.4, {1e-3});
            }),
            ErrorCode::InvalidArgument);
}

TEST(EqualityPD, RejectsInequalityProblem) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 0.5);
  const ControllerState z{Vector::Zero(1), Vector::Zero(1)};
  EXPECT_EQ(code_of([&] { equality_pd_field(problem, z, Vector::Zero(1), 0.0, 1.0, 1.0); }),
            ErrorCode::InvalidArgument);
}

TEST(Alinea, IntegralLawOnDownstreamLinks) {
  AlineaLaw law;
  law.ramps = {AlineaRamp{{1, 2}}, AlineaRamp{{2}}};
  law.gains = (Vector(3) << 0.0, 0.5, 2.0).finished();
  law.setpoints = (Vector(3) << 0.0, 10.0, 20.0).finished();
  const Vector ud = alinea_field(law, (Vector(3) << 5.0, 12.0, 19.0).finished());
  EXPECT_NEAR(ud(0), 0.5 * (10.0 - 12.0) + 2.0 * (20.0 - 19.0), 1e-12);
  EXPECT_NEAR(ud(1), 2.0, 1e-12);
  law.ramps.push_back(AlineaRamp{{7}});
  EXPECT_EQ(code_of([&] { alinea_field(law, Vector::Zero(3)); }), ErrorCode::UnknownLink);
}

TEST(InequalityQP, MatchesKnownSolution) {
  // min 1/2 ||z - (2, 2)||^2  s.t.  z1 + z2 <= 2,  z >= 0  ->  z = (1, 1), y = 1.
  const Matrix h = Matrix::Identity(2, 2);
  const Vector f = -2.0 * Vector::Ones(2);
  Matrix a(3, 2);
  a << 1, 1, -1, 0, 0, -1;
  const Vector b = (Vector(3) << 2, 0, 0).finished();
  const QpResult res = solve_inequality_qp(h, f, a, b, 1e-10, 100);
  ASSERT_TRUE(res.converged);
  EXPECT_NEAR(res.z(0), 1.0, 1e-8);
  EXPECT_NEAR(res.z(1), 1.0, 1e-8);
  EXPECT_NEAR(res.multipliers(0), 1.0, 1e-7);
  EXPECT_NEAR(res.multipliers(1), 0.0, 1e-7);
}

TEST(InequalityQP, UnconstrainedReducesToLinearSolve) {
  const Matrix h = (Matrix(2, 2) << 4, 1, 1, 3).finished();
  const Vector f = (Vector(2) << 1, 2).finished();
  const QpResult res = solve_inequality_qp(h, f, Matrix(0, 2), Vector(0), 1e-12, 10);
  ASSERT_TRUE(res.converged);
  EXPECT_LT((h * res.z + f).norm(), 1e-10);
}

namespace {

// Single metered ramp feeding one mainline link: dx/dt = A x + B u.
MpcModel ramp_model() {
  MpcModel model;
  model.A = (Matrix(2, 2) << -0.5, 0.0, 0.5, -0.5).finished();
  model.B = (Matrix(2, 1) << 1.0, 0.0).finished();
  return model;
}

}  // namespace

TEST(Mpc, LooseCeilingsTrackReference) {
  MpcObjective obj{scalar(1.0), Vector::Constant(1, 3.0), Vector::Zero(2), 0.0,
                   Vector::Constant(2, 1e6)};
  const MpcPlan plan = mpc_policy(ramp_model(), obj, Vector::Zero(2), MpcOptions{});
  ASSERT_EQ(plan.inputs.size(), 5u);
  for (const auto& u : plan.inputs) EXPECT_NEAR(u(0), 3.0, 1e-6);
  EXPECT_FALSE(plan.softened);
}

TEST(Mpc, PredictedDensitiesRespectCeilings) {
  const MpcModel model = ramp_model();
  const Vector ceil = Vector::Constant(2, 4.0);
  MpcObjective obj{scalar(1.0), Vector::Constant(1, 10.0), Vector::Zero(2), 1e-3, ceil};
  MpcOptions opt;
  const MpcPlan plan = mpc_policy(model, obj, Vector::Zero(2), opt);
  Vector x = Vector::Zero(2);
  for (const auto& u : plan.inputs) {
    EXPECT_GE(u(0), 0.0);
    x = x + opt.dt * (model.A * x + model.B * u);
    EXPECT_LE(x.maxCoeff(), 4.0 + 1e-6);
  }
  EXPECT_LT(plan.inputs.front()(0), 10.0);
}

TEST(Mpc, InfeasibleStartIsSoftened) {
  MpcObjective obj{scalar(1.0), Vector::Constant(1, 1.0), Vector::Zero(2), 1e-3,
                   Vector::Constant(2, 4.0)};
  const MpcPlan plan = mpc_policy(ramp_model(), obj, Vector::Constant(2, 9.0), MpcOptions{});
  EXPECT_TRUE(plan.softened);
  EXPECT_NEAR(plan.inputs.front()(0), 0.0, 1e-6);
  EXPECT_GT(plan.inputs.back()(0), 0.5);
}

TEST(Mpc, OptionValidation) {
  MpcObjective obj{scalar(1.0), Vector::Constant(1, 1.0), Vector::Zero(2), 0.0,
                   Vector::Constant(2, 4.0)};
  MpcOptions opt;
  opt.replan = 30.0;
  EXPECT_EQ(code_of([&] { mpc_policy(ramp_model(), obj, Vector::Zero(2), opt); }),
            ErrorCode::InvalidArgument);
  opt = MpcOptions{};
  opt.dt = 0.3;
  EXPECT_EQ(code_of([&] { mpc_policy(ramp_model(), obj, Vector::Zero(2), opt); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { mpc_policy(ramp_model(), obj, Vector::Zero(3), MpcOptions{}); }),
            ErrorCode::DimensionMismatch);
}
