#include "pdflow/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pdflow/error.hpp"
#include "pdflow/random.hpp"

namespace pdflow {

namespace {

const StabilityCertificate& require_stability(const CertifiedPlant& plant) {
  if (!plant.stability)
    throw Error(ErrorCode::MissingCertificate, "plant has no Lyapunov certificate");
  return *plant.stability;
}

}  // namespace

CertificateReport certify_inequality(const CertifiedPlant& plant, const TimeVaryingProblem& problem,
                                     double eta, double eps) {
  const auto& stab = require_stability(plant);
  if (problem.kind() != ConstraintKind::Inequality)
    throw Error(ErrorCode::InvalidArgument, "certify_inequality needs an inequality problem");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");

  CertificateReport r;
  r.eta = eta;
  r.eps = eps;
  const auto& cost = problem.cost();
  const double k_bar = problem.constraint().K_bar;

  r.norm_G = spectral_norm(plant.map.G);
  r.norm_C = spectral_norm(plant.plant.C());
  r.norm_PAinvB = spectral_norm(stab.P_x * plant.A_inv * plant.plant.B());
  r.norm_PAinvE = spectral_norm(stab.P_x * plant.A_inv * plant.plant.E());
  r.lambda_max_P = stab.lambda_max_P;
  r.lambda_min_P = stab.lambda_min_P;
  r.lambda_min_Q = stab.lambda_min_Q;

  r.ell = problem.lipschitz_bound();
  r.mu = problem.monotonicity_modulus();
  r.eta_max = 4.0 * r.mu / (r.ell * r.ell);
  r.rho_z = eta * (r.mu - eta * r.ell * r.ell / 4.0);
  if (!(eta > 0.0) || !(r.rho_z > 0.0))
    throw Error(ErrorCode::NonpositiveRate, "eta = " + std::to_string(eta) +
                                                " gives rho_z <= 0 (eta_max = " +
                                                std::to_string(r.eta_max) + ")");
  r.eta_ok = eta < r.eta_max;

  const double g2 = r.norm_G * r.norm_G;
  r.k0 = std::max(2.0 + eta * (cost.ell_u + cost.ell_y * g2), r.norm_G * k_bar);
  r.Psi = r.rho_z * cost.ell_y * r.norm_C * r.norm_G +
          std::sqrt(2.0) * r.norm_C * (cost.ell_y * r.norm_G + k_bar) * r.k0;
  const double denom = 4.0 * eta * r.norm_PAinvB * r.Psi;
  r.eps_max = denom > 0.0 ? r.rho_z * r.lambda_min_Q / denom
                          : std::numeric_limits<double>::infinity();
  r.eps_ok = eps < r.eps_max;

  const double plant_rate = r.lambda_min_Q / r.lambda_max_P;
  r.rho_xi = 0.5 * std::min(2.0 * r.rho_z, plant_rate / (4.0 * eps));
  r.rho_xi_proof = 0.5 * std::min(2.0 * r.rho_z, plant_rate / (2.0 * eps));
  r.kappa = std::max(0.5, r.lambda_max_P) / std::min(0.5, r.lambda_min_P);
  r.gamma_z = 2.0 / r.rho_z;
  r.gamma_w = 4.0 * eps * r.norm_PAinvE / r.lambda_min_Q;

  r.b = eta * r.norm_C * (cost.ell_y * r.norm_G + k_bar);
  r.g = 2.0 * std::sqrt(2.0) * r.norm_PAinvB * r.k0;
  r.d = 2.0 * eta * cost.ell_y * r.norm_PAinvB * r.norm_C * r.norm_G;
  r.theta = (r.b + r.g) > 0.0 ? r.b / (r.b + r.g) : 0.0;
  return r;
}

Matrix build_Pz(const Matrix& KG, double ell, double eta_u, double eta_lambda) {
  const auto r = KG.rows();
  const auto m = KG.cols();
  Matrix pz(m + r, m + r);
  pz.topLeftCorner(m, m) = ell * Matrix::Identity(m, m);
  pz.topRightCorner(m, r) = KG.transpose();
  pz.bottomLeftCorner(r, m) = KG;
  pz.bottomRightCorner(r, r) = ell * (eta_u / eta_lambda) * Matrix::Identity(r, r);
  return pz;
}

EqualityCertificate certify_equality(const CertifiedPlant& plant,
                                     const TimeVaryingProblem& problem, double eta_u,
                                     double eta_lambda, double eps) {
  const auto& stab = require_stability(plant);
  if (problem.kind() != ConstraintKind::Equality)
    throw Error(ErrorCode::InvalidArgument, "certify_equality needs an equality problem");
  if (!(eta_u > 0.0) || !(eta_lambda > 0.0) || !(eps > 0.0))
    throw Error(ErrorCode::InvalidArgument, "gains and eps must be positive");
  const auto& con = problem.constraint();
  if (!con.constant_K || !con.k_lo || !con.k_hi)
    throw Error(ErrorCode::InvalidArgument,
                "equality certificate needs a constant K with spectral bounds");

  EqualityCertificate c;
  c.eta_u = eta_u;
  c.eta_lambda = eta_lambda;
  c.eps = eps;
  c.lambda_max_P = stab.lambda_max_P;
  c.lambda_min_P = stab.lambda_min_P;
  c.lambda_min_Q = stab.lambda_min_Q;

  const auto& cost = problem.cost();
  const Matrix& G = plant.map.G;
  const Matrix& C = plant.plant.C();
  const Matrix K = con.K(0.0);
  const Matrix KG = K * G;
  const double norm_G = spectral_norm(G);
  const double norm_C = spectral_norm(C);
  c.ell = cost.ell_u + norm_G * norm_G * cost.ell_y;
  c.k_lo = *con.k_lo;
  c.k_hi = *con.k_hi;
  c.ratio_required = 4.0 * c.k_hi / (c.ell * cost.mu_u);
  if (!(eta_u / eta_lambda > c.ratio_required))
    throw Error(ErrorCode::GainRatioViolated,
                "eta_u / eta_lambda = " + std::to_string(eta_u / eta_lambda) +
                    " must exceed " + std::to_string(c.ratio_required));

  c.P_z = build_Pz(KG, c.ell, eta_u, eta_lambda);
  c.lambda_min_Pz = min_eigenvalue(c.P_z);
  c.lambda_max_Pz = max_eigenvalue(c.P_z);
  c.norm_Pz = spectral_norm(c.P_z);
  if (!(c.lambda_min_Pz > 0.0))
    throw Error(ErrorCode::PzNotPD,
                "smallest eigenvalue of P_z is " + std::to_string(c.lambda_min_Pz));

  c.rho_z = 0.5 * std::min(eta_lambda * c.k_lo / c.ell, eta_u * cost.mu_u / 2.0);

  const Matrix PAinv = stab.P_x * plant.A_inv;
  const Matrix& B = plant.plant.B();
  c.sigma1 = 2.0 * eta_u * cost.ell_y * norm_C * norm_G * (c.ell + spectral_norm(KG)) +
             2.0 * eta_lambda * spectral_norm(KG.transpose() * K * C) +
             2.0 * c.ell * eta_u * spectral_norm(K * C);
  c.sigma2 = 2.0 * eta_u * c.ell * spectral_norm(PAinv * B) +
             2.0 * eta_u * spectral_norm(PAinv * B * KG.transpose());
  c.sigma3 = 2.0 * eta_u * cost.ell_y * norm_C * spectral_norm(PAinv * B * G.transpose());
  const double denom = 16.0 * c.sigma1 * c.sigma2 + 4.0 * c.rho_z * c.lambda_min_Pz * c.sigma3;
  c.eps_max = denom > 0.0 ? c.rho_z * c.lambda_min_P * c.lambda_min_Pz / denom
                          : std::numeric_limits<double>::infinity();
  c.eps_ok = eps < c.eps_max;

  c.rho_xi = 0.25 * std::min(c.rho_z * c.lambda_min_Pz / c.lambda_max_Pz,
                             c.lambda_min_Q / (eps * c.lambda_max_P));
  c.kappa = std::max(c.lambda_max_P, c.lambda_max_Pz) / std::min(c.lambda_min_P, c.lambda_min_Pz);
  c.gamma_z = 4.0 * c.norm_Pz * std::sqrt(c.kappa) / (c.rho_z * c.lambda_min_Pz);
  c.gamma_w = 4.0 * spectral_norm(PAinv * plant.plant.E()) * std::sqrt(c.kappa) / c.lambda_min_Q;
  c.theta = (c.sigma1 + c.sigma2) > 0.0 ? c.sigma1 / (c.sigma1 + c.sigma2) : 0.0;
  return c;
}

EnvelopeCoefficients envelope_coefficients(const CertificateReport& report) {
  return {report.kappa, report.rho_xi, report.gamma_z, report.gamma_w, report.pass()};
}

EnvelopeCoefficients envelope_coefficients(const EqualityCertificate& report) {
  return {report.kappa, report.rho_xi, report.gamma_z, report.gamma_w, report.pass()};
}

double envelope(const EnvelopeCoefficients& c, double initial_error, double t0, double t,
                double sup_zstar_rate, double sup_w_rate) {
  if (!c.pass) throw Error(ErrorCode::FailedCertificate, "gains are not certified");
  return std::sqrt(c.kappa) * initial_error * std::exp(-0.5 * c.rho_xi * (t - t0)) +
         envelope_floor(c, sup_zstar_rate, sup_w_rate);
}

double envelope_floor(const EnvelopeCoefficients& c, double sup_zstar_rate, double sup_w_rate) {
  return c.gamma_z * sup_zstar_rate + c.gamma_w * sup_w_rate;
}

ConstantEstimate estimate_constants(const TimeVaryingProblem& problem, int sample_count,
                                    double radius, double t0, double t1, std::uint64_t seed,
                                    double slack) {
  if (sample_count < 100)
    throw Error(ErrorCode::InvalidArgument, "estimate_constants needs at least 100 samples");
  ConstantEstimate est;
  est.mu = problem.monotonicity_modulus();
  est.ell = problem.lipschitz_bound();
  est.samples = sample_count;
  est.mu_hat = std::numeric_limits<double>::infinity();
  est.monotone_margin = std::numeric_limits<double>::infinity();
  est.lipschitz_excess = -std::numeric_limits<double>::infinity();

  const auto m = problem.inputs();
  const auto r = problem.multipliers();
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    Vector v(m + r);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = uniform(rng, -radius, radius);
    return v;
  };
  for (int s = 0; s < sample_count; ++s) {
    const Vector z1 = draw();
    const Vector z2 = draw();
    const double t = uniform(rng, t0, t1);
    const Vector dz = z1 - z2;
    const double n2 = dz.squaredNorm();
    if (n2 == 0.0) continue;
    const Vector dF = problem.saddle_map(ControllerState::split(z1, m), t) -
                      problem.saddle_map(ControllerState::split(z2, m), t);
    const double inner = dz.dot(dF);
    est.mu_hat = std::min(est.mu_hat, inner / n2);
    est.ell_hat = std::max(est.ell_hat, dF.norm() / std::sqrt(n2));
    est.monotone_margin = std::min(est.monotone_margin, inner - est.mu * n2);
    est.lipschitz_excess = std::max(est.lipschitz_excess, dF.norm() - est.ell * std::sqrt(n2));
  }
  if (est.monotone_margin < -slack)
    throw Error(ErrorCode::ConstantViolated,
                "sampled monotonicity " + std::to_string(est.mu_hat) + " below mu = " +
                    std::to_string(est.mu));
  if (est.lipschitz_excess > slack)
    throw Error(ErrorCode::ConstantViolated,
                "sampled Lipschitz ratio " + std::to_string(est.ell_hat) + " above ell = " +
                    std::to_string(est.ell));
  return est;
}

}  // namespace pdflow
