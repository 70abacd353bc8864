#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "pdflow/problem.hpp"

using namespace pdflow;
using pdflow::test::code_of;
using pdflow::test::scalar;

TEST(InputSet, Projections) {
  const InputSet box = InputSet::box(Vector::Constant(2, 0.0), Vector::Constant(2, 1.0));
  const Vector v = (Vector(2) << -0.5, 3.0).finished();
  EXPECT_EQ(box.project(v), (Vector(2) << 0.0, 1.0).finished());
  EXPECT_NEAR(box.distance(v), std::hypot(0.5, 2.0), 1e-12);
  EXPECT_TRUE(box.contains(box.project(v)));

  const InputSet ball = InputSet::ball(Vector::Zero(2), 2.0);
  const Vector pb = ball.project((Vector(2) << 3.0, 4.0).finished());
  EXPECT_NEAR(pb.norm(), 2.0, 1e-12);
  EXPECT_NEAR(pb(0) / pb(1), 0.75, 1e-12);

  EXPECT_EQ(InputSet::nonneg(2).project(v), (Vector(2) << 0.0, 3.0).finished());
  EXPECT_EQ(InputSet::full(2).project(v), v);
  EXPECT_EQ(project_nonneg(v), (Vector(2) << 0.0, 3.0).finished());
}

TEST(InputSet, ProjectionJacobianOfBox) {
  const InputSet box = InputSet::box(Vector::Constant(2, 0.0), Vector::Constant(2, 1.0));
  const Matrix j = box.projection_jacobian((Vector(2) << 0.5, 2.0).finished());
  EXPECT_EQ(j(0, 0), 1.0);
  EXPECT_EQ(j(1, 1), 0.0);
}

TEST(InputSet, UnknownKind) {
  EXPECT_EQ(InputSet::parse_kind("box"), InputSet::Kind::Box);
  EXPECT_EQ(code_of([] { InputSet::parse_kind("simplex"); }), ErrorCode::UnsupportedSet);
}

TEST(Cost, QuadraticConstantsAreVerified) {
  QuadraticCostSpec cs;
  cs.Q_u = (Matrix(2, 2) << 3, 1, 1, 2).finished();
  cs.r_u = Signal::sinusoid(Vector::Ones(2), 0.1, 0.0, Vector::Zero(2));
  cs.Q_y = scalar(1.5);
  cs.r_y = Signal::zero(1);
  cs.c = Signal::constant(Vector::Ones(1));
  const CostModel cost = quadratic_cost(cs);
  EXPECT_NEAR(cost.mu_u, min_eigenvalue(cs.Q_u), 1e-12);
  EXPECT_NEAR(cost.ell_u, max_eigenvalue(cs.Q_u), 1e-12);
  EXPECT_NEAR(cost.ell_y, 1.5, 1e-12);
  EXPECT_NO_THROW(verify_cost_constants(cost, 500, 5.0, 0.0, 10.0, 3));

  CostModel bad = cost;
  bad.ell_u = 0.5 * cost.ell_u;
  EXPECT_EQ(code_of([&] { verify_cost_constants(bad, 500, 5.0, 0.0, 10.0, 3); }),
            ErrorCode::ConstantViolated);
}

TEST(Constraint, DeclaredBoundsAreChecked) {
  const auto c = OutputConstraint::time_varying(
      ConstraintKind::Inequality, 1, 1, [](double t) { return scalar(1.0 + 0.5 * std::sin(t)); },
      Signal::zero(1), 1.2, 0.0);
  EXPECT_EQ(code_of([&] { c.check_bounds(0.0, 10.0, 200); }), ErrorCode::BoundViolated);
  const auto ok = OutputConstraint::time_varying(
      ConstraintKind::Inequality, 1, 1, [](double t) { return scalar(1.0 + 0.5 * std::sin(t)); },
      Signal::zero(1), 1.5, 0.0);
  EXPECT_NO_THROW(ok.check_bounds(0.0, 10.0, 200));
}

TEST(Problem, ScalarSaddlePointMatchesClosedForm) {
  const auto plant = test::scalar_plant();
  for (double nu : {0.01, 0.1, 1.0}) {
    const auto problem = test::scalar_problem(plant, nu);
    const SaddlePoint sp = solve_saddle_point(problem, plant.plant, 0.0);
    EXPECT_NEAR(sp.lambda(0), 2.0 / (1.0 + 2.0 * nu), 1e-9);
    EXPECT_NEAR(sp.u(0), 2.0 * nu / (1.0 + 2.0 * nu), 1e-9);
    EXPECT_NEAR(sp.x(0), sp.u(0), 1e-9);
    EXPECT_LT(sp.kkt_residual, 1e-10);
  }
}

TEST(Problem, ExactSaddlePoint) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 0.1);
  SaddleOptions opt;
  opt.exact = true;
  const SaddlePoint sp = solve_saddle_point(problem, 0.0, opt);
  EXPECT_NEAR(sp.u(0), 0.0, 1e-9);
  EXPECT_NEAR(sp.lambda(0), 2.0, 1e-9);
  EXPECT_LT(fixed_point_residual(problem, sp.z(), 0.0, 0.3, 0.0), 1e-9);
}

TEST(Problem, AnalyticConstants) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 0.1);
  EXPECT_NEAR(problem.monotonicity_modulus(), 0.1, 1e-15);
  EXPECT_NEAR(problem.lipschitz_bound(), std::sqrt(2.0) * 3.0, 1e-12);
}

TEST(Problem, ModifiedGradients) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 0.5);
  const auto g = problem.modified_gradients(Vector::Constant(1, 2.0), Vector::Constant(1, 3.0),
                                            Vector::Constant(1, 4.0), 0.0);
  EXPECT_NEAR(g.L_u(0), 2.0 * (2.0 - 1.0) + 4.0, 1e-12);
  EXPECT_NEAR(g.L_lambda(0), 3.0 - 0.5 * 4.0, 1e-12);
}

TEST(Problem, RegularizationBoundOnScalar) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 0.1);
  const auto rep = regularization_error_check(problem, 0.0);
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.gap_pass);
  EXPECT_NEAR(rep.lhs, 2.0 / 36.0 + 0.05 * 25.0 / 9.0, 1e-9);
  EXPECT_NEAR(rep.rhs, 0.2, 1e-9);
}

TEST(Problem, EqualityNeedsFullRankKG) {
  const LtiPlant lti(-Matrix::Identity(2, 2), (Matrix(2, 1) << 1, 1).finished(),
                     Matrix::Identity(2, 2), Matrix::Zero(2, 1), Matrix::Zero(2, 1));
  const auto plant = certify_plant(lti);
  QuadraticCostSpec cs;
  cs.Q_u = scalar(1);
  cs.r_u = Signal::zero(1);
  cs.Q_y = Matrix::Zero(2, 2);
  cs.r_y = Signal::zero(2);
  cs.c = Signal::zero(2);
  const TimeVaryingProblem problem(
      quadratic_cost(cs),
      OutputConstraint::fixed(ConstraintKind::Equality, Matrix::Identity(2, 2),
                              Signal::constant(Vector::Ones(2))),
      InputSet::full(1), 0.0, plant.map, Signal::zero(1));
  EXPECT_EQ(code_of([&] { solve_saddle_point(problem, 0.0); }), ErrorCode::Infeasible);
}

TEST(Problem, SaddleRateOfTimeVaryingReference) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(
      plant, 0.1, Signal::sinusoid(Vector::Ones(1), 0.1, 0.0, Vector::Zero(1)));
  EXPECT_FALSE(problem.is_static());
  const double rate = estimate_saddle_rate(problem, 0.0, 20.0, 0.05);
  EXPECT_GT(rate, 0.0);
  EXPECT_TRUE(std::isfinite(rate));
  EXPECT_EQ(estimate_saddle_rate(test::scalar_problem(plant, 0.1), 0.0, 20.0, 0.05), 0.0);
}
