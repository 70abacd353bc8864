#include "pdflow/linalg.hpp"

#include <cmath>
#include <limits>

#include "pdflow/error.hpp"

namespace pdflow {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double min_eigenvalue(const Matrix& sym) {
  Matrix s = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& sym) {
  Matrix s = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double spectral_abscissa(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

int numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * std::max(1.0, s(0));
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++rank;
  return rank;
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

bool is_positive_definite(const Matrix& sym) {
  if (sym.rows() != sym.cols() || sym.rows() == 0) return false;
  return min_eigenvalue(sym) > 0.0;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  const Eigen::Index n = a.rows();
  require_shape(a, n, n, "A");
  require_shape(q, n, n, "Q");
  const Eigen::Index nn = n * n;
  // Column-major vec: vec(A^T P) = (I (x) A^T) vec(P), vec(P A) = (A^T (x) I) vec(P).
  Matrix kron = Matrix::Zero(nn, nn);
  const Matrix at = a.transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    kron.block(j * n, j * n, n, n) += at;
    for (Eigen::Index i = 0; i < n; ++i)
      kron.block(i * n, j * n, n, n).diagonal().array() += at(i, j);
  }
  Eigen::Map<const Vector> qvec(q.data(), nn);
  Vector pvec = kron.fullPivLu().solve(-qvec);
  Matrix p = Eigen::Map<Matrix>(pvec.data(), n, n);
  return 0.5 * (p + p.transpose());
}

double lyapunov_residual(const Matrix& a, const Matrix& p, const Matrix& q) {
  return (a.transpose() * p + p * a + q).norm();
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const std::string& name) {
  if (m.rows() != rows || m.cols() != cols)
    throw Error(ErrorCode::DimensionMismatch,
                name + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
}

void require_size(const Vector& v, Eigen::Index size, const std::string& name) {
  if (v.size() != size)
    throw Error(ErrorCode::DimensionMismatch,
                name + " has length " + std::to_string(v.size()) + ", expected " +
                    std::to_string(size));
}

}  // namespace pdflow
