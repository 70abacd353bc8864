#pragma once

#include <Eigen/Dense>
#include <string>

namespace pdflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Induced 2-norm (largest singular value). Zero for empty matrices.
double spectral_norm(const Matrix& m);

/// Extreme eigenvalues of a symmetric matrix (symmetric part is used).
double min_eigenvalue(const Matrix& sym);
double max_eigenvalue(const Matrix& sym);

/// Largest real part over the spectrum of a square matrix.
double spectral_abscissa(const Matrix& a);

/// Ratio of extreme singular values; +inf when the smallest is zero.
double condition_number(const Matrix& m);

int numerical_rank(const Matrix& m, double rel_tol = 1e-10);

bool is_symmetric(const Matrix& m, double tol = 1e-12);
bool is_positive_definite(const Matrix& sym);

/// Solves A^T P + P A = -Q by the vectorized (Kronecker) linear system
/// (I (x) A^T + A^T (x) I) vec(P) = -vec(Q). Intended for n up to ~100.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// Frobenius norm of A^T P + P A + Q.
double lyapunov_residual(const Matrix& a, const Matrix& p, const Matrix& q);

/// Throws DimensionMismatch unless m is rows x cols.
void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const std::string& name);
void require_size(const Vector& v, Eigen::Index size, const std::string& name);

}  // namespace pdflow
