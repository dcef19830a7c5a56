#include "oqw/micro.hpp"

#include "oqw/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace oqw {

// ---------------------------------------------------------------------------
// Bath
// ---------------------------------------------------------------------------

void validate_bath(const BathSpec& b) {
  if (!(b.gamma_se > 0.0)) throw std::invalid_argument("bath: gamma_se must be positive");
  for (const auto& [edge, g] : b.gamma_se_edges)
    if (!(g >= 0.0)) throw std::invalid_argument("bath: edge coupling rates must be non-negative");
  if (b.inv_temperature < 0.0)
    throw std::invalid_argument("bath: inv_temperature must be positive");
  const int modes = (b.zero_temperature ? 1 : 0) + (b.inv_temperature > 0.0 ? 1 : 0) +
                    (b.n_mean >= 0.0 ? 1 : 0);
  if (modes != 1)
    throw std::invalid_argument(
        "bath: specify exactly one of zero_temperature, inv_temperature, n_mean");
  if (b.n_mean >= 0.0 && !(b.reference_frequency > 0.0))
    throw std::invalid_argument("bath: n_mean requires a positive reference_frequency");
  if (b.reference_frequency < 0.0)
    throw std::invalid_argument("bath: reference_frequency must be positive");
}

double occupation(const BathSpec& b, double omega_abs) {
  validate_bath(b);
  if (omega_abs < 0.0) throw std::invalid_argument("occupation: frequency must be non-negative");
  if (b.zero_temperature) return 0.0;
  if (omega_abs == 0.0)
    throw std::invalid_argument("occupation: zero frequency is singular at finite temperature");
  if (b.n_mean >= 0.0) {
    // Bit-exact at the reference frequency; elsewhere the implied beta.
    if (omega_abs == b.reference_frequency) return b.n_mean;
    if (b.n_mean == 0.0) return 0.0;
    const double beta = std::log1p(1.0 / b.n_mean) / b.reference_frequency;
    return 1.0 / std::expm1(beta * omega_abs);
  }
  return 1.0 / std::expm1(b.inv_temperature * omega_abs);
}

double gamma_se_for(const BathSpec& b, std::pair<int, int> edge) {
  if (edge.first > edge.second) std::swap(edge.first, edge.second);
  const auto it = b.gamma_se_edges.find(edge);
  return it == b.gamma_se_edges.end() ? b.gamma_se : it->second;
}

double thermal_rate(const BathSpec& b, std::pair<int, int> edge, double omega_signed) {
  validate_bath(b);
  const double g = gamma_se_for(b, edge);
  if (omega_signed == 0.0) {
    // Degenerate channel: emission and absorption coincide; use the
    // symmetrized rate at the bath's reference occupation.
    double n_ref = 0.0;
    if (!b.zero_temperature) {
      if (!(b.reference_frequency > 0.0))
        throw std::invalid_argument(
            "thermal_rate: zero-frequency channel is singular at finite temperature "
            "without a reference_frequency");
      n_ref = occupation(b, b.reference_frequency);
    }
    return g * (n_ref + 0.5);
  }
  const double n = occupation(b, std::abs(omega_signed));
  return omega_signed < 0.0 ? g * (n + 1.0) : g * n;
}

// ---------------------------------------------------------------------------
// Model validation and coin resolution
// ---------------------------------------------------------------------------

namespace {

int checked_dim(const MicroscopicModel& m) {
  const int nodes = m.graph.node_count;
  if (nodes <= 0) throw std::invalid_argument("model: graph has no nodes");
  if (static_cast<int>(m.node_hamiltonians.size()) != nodes)
    throw std::invalid_argument("model: need one node Hamiltonian per node");
  const int dim = static_cast<int>(m.node_hamiltonians[0].rows());
  if (dim <= 0) throw std::invalid_argument("model: node Hamiltonians must be non-empty");
  for (const Matrix& h : m.node_hamiltonians) {
    if (h.rows() != dim || h.cols() != dim)
      throw std::invalid_argument("model: node Hamiltonian dimension mismatch");
    if (!is_hermitian(h))
      throw std::invalid_argument("model: node Hamiltonians must be Hermitian");
  }
  if (!m.residual_hamiltonians.empty()) {
    if (static_cast<int>(m.residual_hamiltonians.size()) != nodes)
      throw std::invalid_argument("model: residual Hamiltonians must cover every node");
    for (const Matrix& h : m.residual_hamiltonians) {
      if (h.rows() != dim || h.cols() != dim)
        throw std::invalid_argument("model: residual Hamiltonian dimension mismatch");
      if (!is_hermitian(h))
        throw std::invalid_argument("model: residual Hamiltonians must be Hermitian");
    }
  }
  return dim;
}

}  // namespace

std::map<std::pair<int, int>, Matrix> resolved_coins(const MicroscopicModel& m) {
  const int dim = checked_dim(m);
  for (const auto& [key, op] : m.coins) {
    if (!has_edge(m.graph, key.first, key.second))
      throw std::invalid_argument("model: coin given for a pair that is not a graph edge");
    if (op.rows() != dim || op.cols() != dim)
      throw std::invalid_argument("model: coin dimension mismatch");
  }
  std::map<std::pair<int, int>, Matrix> out;
  for (const auto& [from, to] : m.graph.edges) {
    const auto fwd = m.coins.find({from, to});
    const auto rev = m.coins.find({to, from});
    if (fwd != m.coins.end() && rev != m.coins.end()) {
      if (max_abs(fwd->second - rev->second.adjoint()) > 1e-12)
        throw std::invalid_argument(
            "model: coins for the two directions of an edge must be mutual adjoints");
      out[{from, to}] = fwd->second;
    } else if (fwd != m.coins.end()) {
      out[{from, to}] = fwd->second;
    } else if (rev != m.coins.end()) {
      out[{from, to}] = rev->second.adjoint();
    } else {
      throw std::invalid_argument("model: edge has no coin in either direction");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frequency decomposition
// ---------------------------------------------------------------------------

EigenOperatorSet eigen_decompose_coins(const MicroscopicModel& m, double cluster_tol) {
  const auto coins = resolved_coins(m);

  std::vector<HermitianEigen> spectra;
  spectra.reserve(m.node_hamiltonians.size());
  double max_abs_eig = 0.0;
  for (const Matrix& h : m.node_hamiltonians) {
    spectra.push_back(hermitian_eigen(h));
    for (double v : spectra.back().cluster_values) max_abs_eig = std::max(max_abs_eig, std::abs(v));
  }
  if (cluster_tol < 0.0) cluster_tol = 1e-9 * std::max(1.0, max_abs_eig);

  EigenOperatorSet set;
  for (const auto& [edge, coin] : coins) {
    const HermitianEigen& src = spectra[edge.first - 1];
    const HermitianEigen& dst = spectra[edge.second - 1];

    // All projector sandwiches with their transition frequencies, sorted so
    // near-equal frequencies can merge into one operator.
    std::vector<std::pair<double, Matrix>> parts;
    for (std::size_t a = 0; a < dst.projectors.size(); ++a)
      for (std::size_t b = 0; b < src.projectors.size(); ++b)
        parts.emplace_back(dst.cluster_values[a] - src.cluster_values[b],
                           Matrix(dst.projectors[a] * coin * src.projectors[b]));
    std::sort(parts.begin(), parts.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    const double drop = 1e-14 * std::max(1.0, max_abs(coin));
    std::vector<EigenOperator>& ops = set.by_edge[edge];
    std::size_t i = 0;
    while (i < parts.size()) {
      std::size_t j = i + 1;
      double sum = parts[i].first;
      Matrix acc = parts[i].second;
      while (j < parts.size() && parts[j].first - parts[j - 1].first < cluster_tol) {
        sum += parts[j].first;
        acc += parts[j].second;
        ++j;
      }
      double omega = sum / static_cast<double>(j - i);
      if (std::abs(omega) <= cluster_tol) omega = 0.0;
      if (max_abs(acc) >= drop) ops.push_back({omega, std::move(acc)});
      i = j;
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

GeneratorSpec build_generator(const MicroscopicModel& m, const EigenOperatorSet& eops,
                              const BathSpec& bath) {
  validate_bath(bath);
  const int dim = checked_dim(m);
  const int nodes = m.graph.node_count;

  GeneratorSpec g;
  g.dim = dim;
  g.graph = m.graph;
  g.hamiltonians.assign(nodes, Matrix::Zero(dim, dim));
  if (!m.residual_hamiltonians.empty()) g.hamiltonians = m.residual_hamiltonians;
  g.loss.assign(nodes, Matrix::Zero(dim, dim));

  for (const auto& [from, to] : m.graph.edges) {
    const auto it = eops.by_edge.find({from, to});
    if (it == eops.by_edge.end()) continue;
    for (const EigenOperator& e : it->second) {
      const double rate = thermal_rate(bath, {from, to}, e.omega);
      if (rate < 0.0) throw std::logic_error("build_generator: negative channel rate");
      if (rate == 0.0) continue;
      g.channels.push_back({from, to, e.omega, rate, e.op});
      g.loss[from - 1] += rate * (e.op.adjoint() * e.op);
    }
  }
  return g;
}

GeneratorSpec build_generator(const MicroscopicModel& m, const EigenOperatorSet& eops) {
  return build_generator(m, eops, m.bath);
}

GeneratorSpec build_generator(const MicroscopicModel& m) {
  return build_generator(m, eigen_decompose_coins(m), m.bath);
}

// ---------------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------------

std::string frequency_label(double omega) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "w=%.9g", omega);
  return buf;
}

namespace {

TransitionTable table_shell(const GeneratorSpec& g, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("discretize: delta must be positive");
  if (g.dim <= 0) throw std::invalid_argument("discretize: generator has no dimension");
  TransitionTable t;
  t.dim = g.dim;
  t.graph = g.graph;
  t.edge_ops.resize(g.graph.edges.size());
  t.loop_ops.resize(g.graph.node_count);
  t.delta = delta;
  t.max_rate = 0.0;
  for (const JumpChannel& c : g.channels) {
    const int e = edge_index(g.graph, c.source, c.target);
    if (e < 0) throw std::logic_error("discretize: channel does not match a graph edge");
    t.edge_ops[e].push_back({std::sqrt(delta * c.rate) * c.op, frequency_label(c.omega)});
    t.max_rate = std::max(t.max_rate, c.rate);
  }
  return t;
}

double spectral_norm(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

}  // namespace

TransitionTable discretize(const GeneratorSpec& g, double delta) {
  TransitionTable t = table_shell(g, delta);
  const Matrix eye = identity(g.dim);
  const Complex minus_i(0.0, -1.0);
  for (int j = 0; j < g.graph.node_count; ++j) {
    const Eigen::SelfAdjointEigenSolver<Matrix> es(g.loss[j], Eigen::EigenvaluesOnly);
    if (delta * es.eigenvalues().maxCoeff() >= 1.0)
      throw std::runtime_error("discretize: delta * largest loss rate reaches 1; reduce delta");
    t.loop_ops[j] = eye - (0.5 * delta) * g.loss[j] + (minus_i * delta) * g.hamiltonians[j];
    // With PSD loss, |loop|^2 <= 1 + delta^2 |loss/2 + iH|^2; exceeding that
    // bound means the generator pieces are inconsistent.
    const double w = spectral_norm(0.5 * g.loss[j] + Complex(0, 1) * g.hamiltonians[j]);
    const double n = spectral_norm(t.loop_ops[j]);
    if (n * n > 1.0 + delta * delta * w * w * (1.0 + 1e-9) + 1e-12)
      throw std::runtime_error("discretize: loop operator norm exceeds its first-order bound");
  }
  return t;
}

TransitionTable discretize_exact(const GeneratorSpec& g, double delta) {
  TransitionTable t = table_shell(g, delta);
  const Matrix eye = identity(g.dim);
  for (int j = 0; j < g.graph.node_count; ++j) {
    const Matrix remain = eye - delta * g.loss[j];
    const Eigen::SelfAdjointEigenSolver<Matrix> es(remain, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12)
      throw std::runtime_error(
          "discretize_exact: I - delta * loss is not positive semidefinite; reduce delta");
    t.loop_ops[j] = unitary_exp(g.hamiltonians[j], delta) * psd_sqrt(remain);
  }
  return t;
}

}  // namespace oqw
