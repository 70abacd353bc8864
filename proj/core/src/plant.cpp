#include "pdflow/plant.hpp"

#include "pdflow/error.hpp"

namespace pdflow {

LtiPlant::LtiPlant(Matrix a, Matrix b, Matrix c, Matrix d, Matrix e)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)), e_(std::move(e)) {
  const auto n = a_.rows();
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "A must be non-empty");
  require_shape(a_, n, n, "A");
  if (b_.rows() != n) throw Error(ErrorCode::DimensionMismatch, "B must have n rows");
  if (c_.cols() != n) throw Error(ErrorCode::DimensionMismatch, "C must have n columns");
  if (e_.rows() != n) throw Error(ErrorCode::DimensionMismatch, "E must have n rows");
  require_shape(d_, c_.rows(), e_.cols(), "D");
}

Vector LtiPlant::vector_field(const Vector& x, const Vector& u, const Vector& w,
                              double eps) const {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  require_size(x, states(), "x");
  require_size(u, inputs(), "u");
  require_size(w, disturbances(), "w");
  return (a_ * x + b_ * u + e_ * w) / eps;
}

Vector LtiPlant::output(const Vector& x, const Vector& w) const {
  require_size(x, states(), "x");
  require_size(w, disturbances(), "w");
  return c_ * x + d_ * w;
}

Vector LtiPlant::equilibrium(const Vector& u, const Vector& w) const {
  require_size(u, inputs(), "u");
  require_size(w, disturbances(), "w");
  return -a_.partialPivLu().solve(b_ * u + e_ * w);
}

StabilityCertificate check_stability(const LtiPlant& plant, const std::optional<Matrix>& q_x) {
  const auto n = plant.states();
  Matrix q = q_x.value_or(Matrix::Identity(n, n));
  require_shape(q, n, n, "Q_x");
  if (!is_symmetric(q) || !is_positive_definite(q))
    throw Error(ErrorCode::InvalidArgument, "Q_x must be symmetric positive definite");

  const double abscissa = spectral_abscissa(plant.A());
  if (!(abscissa < kHurwitzMargin))
    throw Error(ErrorCode::NotHurwitz,
                "max Re(eig(A)) = " + std::to_string(abscissa) + " is not below -1e-9");
  if (numerical_rank(plant.C()) < n)
    throw Error(ErrorCode::RankDeficientC, "columns of C are not linearly independent");

  StabilityCertificate cert;
  cert.Q_x = q;
  cert.P_x = solve_lyapunov(plant.A(), q);
  cert.lambda_max_P = max_eigenvalue(cert.P_x);
  cert.lambda_min_P = min_eigenvalue(cert.P_x);
  cert.lambda_min_Q = min_eigenvalue(q);
  cert.residual = lyapunov_residual(plant.A(), cert.P_x, q);
  return cert;
}

SteadyStateMap steady_state_map(const LtiPlant& plant) {
  if (condition_number(plant.A()) > 1e12)
    throw Error(ErrorCode::SingularA, "A is numerically singular (cond > 1e12)");
  auto lu = plant.A().fullPivLu();
  SteadyStateMap map;
  map.G = -plant.C() * lu.solve(plant.B());
  map.H = plant.D() - plant.C() * lu.solve(plant.E());
  return map;
}

CertifiedPlant certify_plant(const LtiPlant& plant, const std::optional<Matrix>& q_x) {
  auto stability = check_stability(plant, q_x);
  auto map = steady_state_map(plant);
  Matrix a_inv = plant.A().fullPivLu().inverse();
  return CertifiedPlant{plant, std::move(stability), std::move(map), std::move(a_inv)};
}

}  // namespace pdflow
