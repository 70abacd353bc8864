#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "common.hpp"
#include "pdflow/certificates.hpp"
#include "pdflow/simulator.hpp"

using namespace pdflow;
using pdflow::test::code_of;

namespace {

SimulationOptions scalar_options(const CertifiedPlant& plant, const TimeVaryingProblem& problem,
                                 double t1) {
  SimulationOptions opt;
  opt.gains.eta = 0.11;
  opt.gains.eps = 0.04;
  opt.t1 = t1;
  opt.dt = 0.004;
  opt.log_every = 25;
  opt.diagnostics = diagnostics_for(plant, certify_inequality(plant, problem, 0.11, 0.04));
  return opt;
}

}  // namespace

TEST(Rk4, FourthOrderOnLinearDecay) {
  const auto f = [](double, const Vector& s) -> Vector { return -s; };
  const Vector s0 = Vector::Ones(1);
  const double e1 = std::abs(integrate_ode(f, s0, 0.0, 1.0, 0.1)(0) - std::exp(-1.0));
  const double e2 = std::abs(integrate_ode(f, s0, 0.0, 1.0, 0.05)(0) - std::exp(-1.0));
  EXPECT_NEAR(e1 / e2, 16.0, 1.5);
}

TEST(Rk4, LastStepLandsOnEndpoint) {
  const auto f = [](double, const Vector&) -> Vector { return Vector::Ones(1); };
  EXPECT_NEAR(integrate_ode(f, Vector::Zero(1), 0.0, 1.05, 0.1)(0), 1.05, 1e-12);
}

TEST(Simulator, ClosedLoopConvergesInsideEnvelope) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 1.0);
  const ControllerState z0{Vector::Constant(1, 2.0), Vector::Zero(1)};
  const Vector x0 = plant.plant.equilibrium(z0.u, Vector::Zero(1));
  const TrajectoryLog log = integrate(plant, problem, x0, z0, scalar_options(plant, problem, 100.0));
  ASSERT_FALSE(log.records.empty());
  for (const auto& r : log.records) EXPECT_LE(r.err, r.envelope + 1e-9);
  EXPECT_LT(log.records.back().err, log.records.front().err * 0.05);
  const TrackingReport tr = tracking_report(log);
  EXPECT_LE(tr.max_violation, 0.0);
  EXPECT_LT(tr.decay_slope, 0.0);
  const LyapunovReport ly = lyapunov_diagnostics(log);
  EXPECT_EQ(ly.V.size(), log.records.size());
  EXPECT_EQ(ly.flagged_count, 0);
}

TEST(Simulator, StepTooLarge) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 1.0);
  auto opt = scalar_options(plant, problem, 1.0);
  opt.dt = 0.01;
  const ControllerState z0{Vector::Zero(1), Vector::Zero(1)};
  EXPECT_EQ(code_of([&] { integrate(plant, problem, Vector::Zero(1), z0, opt); }),
            ErrorCode::StepTooLarge);
}

TEST(Simulator, CsvHasCommentHeader) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 1.0);
  const ControllerState z0{Vector::Zero(1), Vector::Zero(1)};
  const TrajectoryLog log =
      integrate(plant, problem, Vector::Zero(1), z0, scalar_options(plant, problem, 1.0));
  std::ostringstream os;
  write_csv(log, os);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("# ", 0), 0u);
  EXPECT_NE(text.find("\nt,"), std::string::npos);
}

TEST(TrackingError, StackedNorm) {
  const auto plant = test::scalar_plant();
  SaddlePoint star;
  star.u = Vector::Zero(1);
  star.lambda = Vector::Zero(1);
  star.x = Vector::Zero(1);
  const ControllerState z{Vector::Constant(1, 3.0), Vector::Zero(1)};
  EXPECT_NEAR(tracking_error(plant.plant, star, Vector::Constant(1, 4.0), z, Vector::Zero(1)), 5.0,
              1e-12);
}

TEST(Reduced, LipschitzFieldStaysFeasible) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 0.5, Signal::zero(1),
                                            InputSet::box(Vector::Zero(1), Vector::Ones(1)));
  const ControllerState z0{Vector::Constant(1, 1.0), Vector::Zero(1)};
  const auto tr = integrate_reduced(problem, z0, 0.2, 0.0, 20.0, 0.01, ReducedField::Lipschitz);
  for (const auto& z : tr.z) {
    EXPECT_TRUE(problem.input_set().contains(z.u, 1e-9));
    EXPECT_GE(z.lambda(0), -1e-9);
  }
  const SaddlePoint sp = solve_saddle_point(problem, 0.0);
  EXPECT_LT((tr.z.back().u - sp.u).norm(), 1e-3);
}
