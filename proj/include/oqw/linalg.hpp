// oqw/linalg.hpp: dense complex matrices and Hermitian eigenstructure.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

namespace oqw {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// ---- fixed operators ----
// Convention, project-wide: basis order (|0>, |1>), sigma_z = diag(-1, +1),
// sigma_plus = |1><0| (raises |0> to |1>), sigma_minus = |0><1|.

inline Matrix identity(int n) { return Matrix::Identity(n, n); }

inline Matrix sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix sigma_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, 1), Complex(0, -1), 0;
  return m;
}

inline Matrix sigma_z() {
  Matrix m(2, 2);
  m << -1, 0, 0, 1;
  return m;
}

inline Matrix sigma_plus() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 0) = 1;
  return m;
}

inline Matrix sigma_minus() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1;
  return m;
}

// n . sigma for a real 3-vector n (not required to be normalized here).
Matrix spin_along(const std::array<double, 3>& n);

// ---- elementwise and product helpers ----

template <class D>
double max_abs(const Eigen::MatrixBase<D>& a) {
  return a.derived().cwiseAbs().maxCoeff();
}

// Square-matrix product with an explicit shape check.
template <class A, class B>
Matrix matmul(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.cols() != b.rows())
    throw std::invalid_argument("matmul: dimension mismatch");
  return a.derived() * b.derived();
}

template <class A>
Matrix adjoint(const Eigen::MatrixBase<A>& a) {
  return a.derived().adjoint();
}

template <class A>
Complex trace(const Eigen::MatrixBase<A>& a) {
  return a.derived().trace();
}

template <class A, class B>
Matrix commutator(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.derived() * b.derived() - b.derived() * a.derived();
}

template <class A, class B>
Matrix anticommutator(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.derived() * b.derived() + b.derived() * a.derived();
}

bool is_hermitian(const Matrix& a, double tol = 1e-10);

// Hermitian to tol, all eigenvalues >= -tol.
bool is_positive_semidefinite(const Matrix& a, double tol = 1e-9);

// ---- Hermitian eigenstructure ----

// Eigenvalues plus one orthogonal projector per degeneracy cluster.
// Invariants: projectors Hermitian, idempotent, mutually orthogonal, summing to
// identity; sum of cluster_value * projector reconstructs the input.
struct HermitianEigen {
  Eigen::VectorXd eigenvalues;         // all N, ascending
  std::vector<double> cluster_values;  // one per distinct eigenvalue
  std::vector<Matrix> projectors;      // parallel to cluster_values
};

// degeneracy_tol < 0 selects the default 1e-9 * max(spectral range, 1).
// Throws std::invalid_argument when the input is not Hermitian to 1e-10.
HermitianEigen hermitian_eigen(const Matrix& a, double degeneracy_tol = -1.0);

// Hermitian PSD square root; throws when an eigenvalue is below -tol.
Matrix psd_sqrt(const Matrix& a, double tol = 1e-12);

// exp(-i t h) for Hermitian h.
Matrix unitary_exp(const Matrix& h, double t);

}  // namespace oqw
