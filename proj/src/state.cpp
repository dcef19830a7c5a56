#include "oqw/state.hpp"

#include <stdexcept>
#include <string>

namespace oqw {

WalkState make_point_state(const WalkGraph& g, int node, Matrix rho0) {
  if (node < 1 || node > g.node_count)
    throw std::invalid_argument("make_point_state: node index out of range");
  if (rho0.rows() != rho0.cols() || rho0.rows() < 1)
    throw std::invalid_argument("make_point_state: block must be square");
  WalkState s;
  s.dim = static_cast<int>(rho0.rows());
  s.blocks.assign(g.node_count, Matrix::Zero(s.dim, s.dim));
  s.blocks[node - 1] = std::move(rho0);
  return s;
}

const Matrix& block(const WalkState& s, int node) {
  if (node < 1 || node > static_cast<int>(s.blocks.size()))
    throw std::invalid_argument("block: node index out of range");
  return s.blocks[node - 1];
}

Matrix& block(WalkState& s, int node) {
  if (node < 1 || node > static_cast<int>(s.blocks.size()))
    throw std::invalid_argument("block: node index out of range");
  return s.blocks[node - 1];
}

double total_trace(const WalkState& s) {
  double t = 0;
  for (const auto& b : s.blocks) t += b.trace().real();
  return t;
}

StateDefects state_defects(const WalkState& s) {
  StateDefects d;
  d.trace_dev = std::abs(total_trace(s) - 1.0);
  d.min_eigenvalue = 0;
  for (const auto& b : s.blocks) {
    d.hermiticity_dev = std::max(d.hermiticity_dev, max_abs(b - b.adjoint()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(b, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = std::min(d.min_eigenvalue, es.eigenvalues().minCoeff());
  }
  return d;
}

void validate_state(const WalkState& s, double trace_tol, double psd_tol) {
  const StateDefects d = state_defects(s);
  if (d.trace_dev > trace_tol)
    throw std::runtime_error("validate_state: total trace deviates by " +
                             std::to_string(d.trace_dev));
  if (d.min_eigenvalue < -psd_tol)
    throw std::runtime_error("validate_state: block eigenvalue " +
                             std::to_string(d.min_eigenvalue) + " below -tolerance");
  if (d.hermiticity_dev > 1e-10)
    throw std::runtime_error("validate_state: block not Hermitian");
}

}  // namespace oqw
