#pragma once

#include <optional>

#include "pdflow/linalg.hpp"

namespace pdflow {

/// LTI plant  eps * dx/dt = A x + B u + E w,   y = C x + D w.
///
/// Construction validates dimensions only; stability is established
/// separately by check_stability so an unstable model can still be loaded
/// and reported on.
class LtiPlant {
 public:
  LtiPlant(Matrix a, Matrix b, Matrix c, Matrix d, Matrix e);

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& C() const { return c_; }
  const Matrix& D() const { return d_; }
  const Matrix& E() const { return e_; }

  Eigen::Index states() const { return a_.rows(); }
  Eigen::Index inputs() const { return b_.cols(); }
  Eigen::Index outputs() const { return c_.rows(); }
  Eigen::Index disturbances() const { return e_.cols(); }

  /// (A x + B u + E w) / eps.
  Vector vector_field(const Vector& x, const Vector& u, const Vector& w, double eps) const;
  Vector output(const Vector& x, const Vector& w) const;

  /// -A^{-1}(B u + E w).
  Vector equilibrium(const Vector& u, const Vector& w) const;

 private:
  Matrix a_, b_, c_, d_, e_;
};

struct StabilityCertificate {
  Matrix P_x;
  Matrix Q_x;
  double lambda_max_P = 0.0;
  double lambda_min_P = 0.0;
  double lambda_min_Q = 0.0;
  double residual = 0.0;  ///< ||A^T P + P A + Q||_F
};

struct SteadyStateMap {
  Matrix G;  ///< -C A^{-1} B
  Matrix H;  ///< D - C A^{-1} E
};

/// Max real part of eig(A) must be below this for A to count as Hurwitz.
inline constexpr double kHurwitzMargin = -1e-9;

/// Solves the Lyapunov equation for the given Q_x (identity when omitted).
/// Throws NotHurwitz, RankDeficientC or DimensionMismatch.
StabilityCertificate check_stability(const LtiPlant& plant,
                                     const std::optional<Matrix>& q_x = std::nullopt);

/// Throws SingularA when cond(A) > 1e12.
SteadyStateMap steady_state_map(const LtiPlant& plant);

/// Plant bundled with its derived data; what the certificates consume.
struct CertifiedPlant {
  LtiPlant plant;
  std::optional<StabilityCertificate> stability;
  SteadyStateMap map;
  Matrix A_inv;
};

/// check_stability + steady_state_map in one go.
CertifiedPlant certify_plant(const LtiPlant& plant,
                             const std::optional<Matrix>& q_x = std::nullopt);

}  // namespace pdflow
