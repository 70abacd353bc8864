#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"
#include "pdflow/certificates.hpp"

using namespace pdflow;
using pdflow::test::code_of;
using pdflow::test::scalar;

namespace {

CertifiedPlant identity_plant() {
  const Matrix i2 = Matrix::Identity(2, 2);
  return certify_plant(LtiPlant(-i2, i2, i2, Matrix::Zero(2, 2), i2));
}

TimeVaryingProblem equality_problem(const CertifiedPlant& plant) {
  QuadraticCostSpec cs;
  cs.Q_u = 2.0 * Matrix::Identity(2, 2);
  cs.r_u = Signal::constant((Vector(2) << 1.0, 0.5).finished());
  cs.Q_y = Matrix::Zero(2, 2);
  cs.r_y = Signal::zero(2);
  cs.c = Signal::zero(2);
  return TimeVaryingProblem(quadratic_cost(cs),
                            OutputConstraint::fixed(ConstraintKind::Equality,
                                                    Matrix::Ones(1, 2),
                                                    Signal::constant(Vector::Ones(1))),
                            InputSet::full(2), 0.0, plant.map,
                            Signal::constant((Vector(2) << 0.2, -0.1).finished()));
}

}  // namespace

TEST(InequalityCertificate, ScalarConstants) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 1.0);
  const CertificateReport rep = certify_inequality(plant, problem, 0.11, 0.04);
  EXPECT_NEAR(rep.ell, 3.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(rep.mu, 1.0, 1e-12);
  EXPECT_NEAR(rep.rho_z, 0.11 * (1.0 - 0.11 * 18.0 / 4.0), 1e-12);
  EXPECT_NEAR(rep.eta_max, 4.0 / 18.0, 1e-12);
  EXPECT_NEAR(rep.norm_PAinvB, 0.5, 1e-12);
  EXPECT_NEAR(rep.eps_max, rep.rho_z * rep.lambda_min_Q / (4.0 * 0.11 * 0.5 * rep.Psi), 1e-12);
  EXPECT_TRUE(rep.pass());
  EXPECT_GT(rep.rho_xi, 0.0);
  EXPECT_GE(rep.kappa, 1.0);
}

TEST(InequalityCertificate, FailingGains) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 1.0);
  EXPECT_EQ(code_of([&] { certify_inequality(plant, problem, 0.3, 0.01); }),
            ErrorCode::NonpositiveRate);
  const CertificateReport rep = certify_inequality(plant, problem, 0.11, 1.0);
  EXPECT_FALSE(rep.eps_ok);
  EXPECT_FALSE(rep.pass());
  const auto coeff = envelope_coefficients(rep);
  EXPECT_EQ(code_of([&] { envelope(coeff, 1.0, 0.0, 1.0, 0.0, 0.0); }),
            ErrorCode::FailedCertificate);
}

TEST(InequalityCertificate, MissingLyapunovCertificate) {
  auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 1.0);
  plant.stability.reset();
  EXPECT_EQ(code_of([&] { certify_inequality(plant, problem, 0.11, 0.04); }),
            ErrorCode::MissingCertificate);
}

TEST(Envelope, DecaysToFloor) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 1.0);
  const auto c = envelope_coefficients(certify_inequality(plant, problem, 0.11, 0.04));
  ASSERT_TRUE(c.pass);
  const double e0 = envelope(c, 2.0, 0.0, 0.0, 0.1, 0.2);
  const double e1 = envelope(c, 2.0, 0.0, 1000.0, 0.1, 0.2);
  EXPECT_NEAR(e0, std::sqrt(c.kappa) * 2.0 + envelope_floor(c, 0.1, 0.2), 1e-12);
  EXPECT_NEAR(e1, envelope_floor(c, 0.1, 0.2), 1e-9);
  EXPECT_NEAR(envelope_floor(c, 0.1, 0.2), c.gamma_z * 0.1 + c.gamma_w * 0.2, 1e-12);
}

TEST(EqualityCertificate, PzAndRatio) {
  const auto plant = identity_plant();
  const auto problem = equality_problem(plant);
  const EqualityCertificate rep = certify_equality(plant, problem, 2.4, 1.0, 1.5e-4);
  EXPECT_NEAR(rep.ratio_required, 2.0, 1e-12);
  EXPECT_GT(rep.lambda_min_Pz, 0.0);
  EXPECT_TRUE(rep.pass());
  const Matrix pz = build_Pz(Matrix::Ones(1, 2), 2.0, 2.4, 1.0);
  EXPECT_EQ(pz.rows(), 3);
  EXPECT_NEAR(pz(2, 2), 2.0 * 2.4, 1e-12);
  EXPECT_NEAR(pz(0, 2), 1.0, 1e-12);
  EXPECT_EQ(code_of([&] { certify_equality(plant, problem, 1.5, 1.0, 1.5e-4); }),
            ErrorCode::GainRatioViolated);
  EXPECT_FALSE(certify_equality(plant, problem, 2.4, 1.0, 1.0).pass());
}

TEST(MonteCarloConstants, AgreeWithAnalytic) {
  const auto plant = test::scalar_plant();
  const auto problem = test::scalar_problem(plant, 0.1);
  const ConstantEstimate est = estimate_constants(problem, 500);
  EXPECT_GE(est.monotone_margin, -1e-8);
  EXPECT_LE(est.lipschitz_excess, 1e-8);
  EXPECT_GE(est.mu_hat, est.mu - 1e-8);
  EXPECT_LE(est.ell_hat, est.ell + 1e-8);
  EXPECT_EQ(code_of([&] { estimate_constants(problem, 50); }), ErrorCode::InvalidArgument);
}
