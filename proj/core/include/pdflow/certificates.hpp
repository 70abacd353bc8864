#pragma once

#include <cstdint>

#include "pdflow/linalg.hpp"
#include "pdflow/plant.hpp"
#include "pdflow/problem.hpp"

namespace pdflow {

/// Gain conditions and envelope constants for the projected controller.
struct CertificateReport {
  double eta = 0.0;
  double eps = 0.0;

  double ell = 0.0;
  double mu = 0.0;
  double rho_z = 0.0;
  double eta_max = 0.0;
  double k0 = 0.0;
  double Psi = 0.0;
  double eps_max = 0.0;
  double rho_xi = 0.0;
  /// Same rate with the 1/(2 eps) plant term that the Lyapunov argument yields.
  double rho_xi_proof = 0.0;
  double kappa = 0.0;
  double gamma_z = 0.0;
  double gamma_w = 0.0;

  // Constants of the composite Lyapunov argument; diagnostic only.
  double b = 0.0;
  double g = 0.0;
  double d = 0.0;
  double theta = 0.0;

  double norm_G = 0.0;
  double norm_C = 0.0;
  double norm_PAinvB = 0.0;
  double norm_PAinvE = 0.0;
  double lambda_max_P = 0.0;
  double lambda_min_P = 0.0;
  double lambda_min_Q = 0.0;

  bool eta_ok = false;
  bool eps_ok = false;
  bool pass() const { return eta_ok && eps_ok; }
};

/// Gain conditions and envelope constants for the equality-constrained
/// controller.
struct EqualityCertificate {
  double eta_u = 0.0;
  double eta_lambda = 0.0;
  double eps = 0.0;

  double ell = 0.0;  ///< ell_u + ||G||^2 ell_y
  double k_lo = 0.0;
  double k_hi = 0.0;
  double ratio_required = 0.0;  ///< eta_u / eta_lambda must exceed this
  Matrix P_z;
  double lambda_min_Pz = 0.0;
  double lambda_max_Pz = 0.0;
  double norm_Pz = 0.0;
  double rho_z = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double sigma3 = 0.0;
  double eps_max = 0.0;
  double rho_xi = 0.0;
  double kappa = 0.0;
  double gamma_z = 0.0;
  double gamma_w = 0.0;
  double theta = 0.0;

  double lambda_max_P = 0.0;
  double lambda_min_P = 0.0;
  double lambda_min_Q = 0.0;

  bool eps_ok = false;
  bool pass() const { return eps_ok; }
};

/// Throws MissingCertificate when the plant has no stability certificate,
/// InvalidArgument for an equality problem and NonpositiveRate when
/// eta >= 4 mu / ell^2.
CertificateReport certify_inequality(const CertifiedPlant& plant, const TimeVaryingProblem& problem,
                                     double eta, double eps);

/// [[ell I, G^T K^T], [K G, ell (eta_u / eta_lambda) I]].
Matrix build_Pz(const Matrix& KG, double ell, double eta_u, double eta_lambda);

/// Throws MissingCertificate, GainRatioViolated (eta_u / eta_lambda too
/// small) or PzNotPD. Requires a constant K.
EqualityCertificate certify_equality(const CertifiedPlant& plant,
                                     const TimeVaryingProblem& problem, double eta_u,
                                     double eta_lambda, double eps);

/// The four numbers the tracking envelope needs.
struct EnvelopeCoefficients {
  double kappa = 1.0;
  double rho_xi = 0.0;
  double gamma_z = 0.0;
  double gamma_w = 0.0;
  bool pass = false;
};

EnvelopeCoefficients envelope_coefficients(const CertificateReport& report);
EnvelopeCoefficients envelope_coefficients(const EqualityCertificate& report);

/// sqrt(kappa) e0 exp(-rho_xi (t - t0) / 2) + gamma_z sup_zdot + gamma_w sup_wdot.
/// Throws FailedCertificate when the coefficients come from a failed report.
double envelope(const EnvelopeCoefficients& c, double initial_error, double t0, double t,
                double sup_zstar_rate, double sup_w_rate);

/// gamma_z sup_zdot + gamma_w sup_wdot, the residual the envelope settles to.
double envelope_floor(const EnvelopeCoefficients& c, double sup_zstar_rate, double sup_w_rate);

struct ConstantEstimate {
  double mu_hat = 0.0;   ///< min over pairs of (z-z')^T (F z - F z') / ||z-z'||^2
  double ell_hat = 0.0;  ///< max over pairs of ||F z - F z'|| / ||z-z'||
  double mu = 0.0;       ///< analytic
  double ell = 0.0;      ///< analytic
  /// min over pairs of (z-z')^T (F z - F z') - mu ||z-z'||^2 (should be >= 0).
  double monotone_margin = 0.0;
  /// max over pairs of ||F z - F z'|| - ell ||z-z'|| (should be <= 0).
  double lipschitz_excess = 0.0;
  int samples = 0;
};

/// Monte-Carlo estimate of the monotonicity modulus and Lipschitz constant
/// of F_t over z, z' in [-radius, radius]^(m+r), t in [t0, t1]. Throws
/// InvalidArgument for sample_count < 100 and ConstantViolated when the
/// estimates contradict the analytic constants by more than slack.
ConstantEstimate estimate_constants(const TimeVaryingProblem& problem, int sample_count,
                                    double radius = 10.0, double t0 = 0.0, double t1 = 1.0,
                                    std::uint64_t seed = 1, double slack = 1e-6);

}  // namespace pdflow
