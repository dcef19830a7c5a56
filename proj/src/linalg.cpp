#include "oqw/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace oqw {

Matrix spin_along(const std::array<double, 3>& n) {
  return n[0] * sigma_x() + n[1] * sigma_y() + n[2] * sigma_z();
}

bool is_hermitian(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return max_abs(a - a.adjoint()) <= tol;
}

bool is_positive_semidefinite(const Matrix& a, double tol) {
  if (!is_hermitian(a, tol)) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

HermitianEigen hermitian_eigen(const Matrix& a, double degeneracy_tol) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw std::invalid_argument("hermitian_eigen: input must be square, N >= 1");
  if (!is_hermitian(a, 1e-10))
    throw std::invalid_argument("hermitian_eigen: input is not Hermitian to 1e-10");

  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eigen: eigensolver failed");

  HermitianEigen out;
  out.eigenvalues = es.eigenvalues();  // ascending
  const int n = static_cast<int>(a.rows());

  double tol = degeneracy_tol;
  if (tol < 0) {
    const double range = out.eigenvalues(n - 1) - out.eigenvalues(0);
    tol = 1e-9 * std::max(range, 1.0);
  }

  // Cluster adjacent eigenvalues within tol; one projector per cluster.
  int lo = 0;
  while (lo < n) {
    int hi = lo + 1;
    while (hi < n && out.eigenvalues(hi) - out.eigenvalues(hi - 1) < tol) ++hi;
    Matrix proj = Matrix::Zero(n, n);
    double value = 0;
    for (int k = lo; k < hi; ++k) {
      proj += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
      value += out.eigenvalues(k);
    }
    out.cluster_values.push_back(value / (hi - lo));
    out.projectors.push_back(std::move(proj));
    lo = hi;
  }
  return out;
}

Matrix psd_sqrt(const Matrix& a, double tol) {
  if (!is_hermitian(a, 1e-10))
    throw std::invalid_argument("psd_sqrt: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("psd_sqrt: eigensolver failed");
  Eigen::VectorXd lam = es.eigenvalues();
  for (int k = 0; k < lam.size(); ++k) {
    if (lam(k) < -tol)
      throw std::invalid_argument("psd_sqrt: input has a negative eigenvalue");
    lam(k) = std::sqrt(std::max(lam(k), 0.0));
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix unitary_exp(const Matrix& h, double t) {
  if (!is_hermitian(h, 1e-10))
    throw std::invalid_argument("unitary_exp: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("unitary_exp: eigensolver failed");
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (int k = 0; k < phases.size(); ++k)
    phases(k) = std::exp(Complex(0, -t * es.eigenvalues()(k)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace oqw
