#include "oqw/models.hpp"

#include "oqw/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace oqw {

const char* normalization_name(TableNormalization n) {
  return n == TableNormalization::truncated ? "truncated" : "exact";
}

namespace {

BathSpec bath_at(double n_mean, double reference_frequency, double gamma_se) {
  BathSpec b;
  b.gamma_se = gamma_se;
  if (n_mean == 0.0) {
    b.zero_temperature = true;
  } else {
    b.n_mean = n_mean;
    b.reference_frequency = reference_frequency;
  }
  return b;
}

// exp(-i t (v . sigma)) in closed form; |v| = 0 gives the identity.
Matrix small_rotation(const std::array<double, 3>& v, double t) {
  const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (norm == 0.0) return identity(2);
  const double th = t * norm;
  Matrix axis = (v[0] / norm) * sigma_x() + (v[1] / norm) * sigma_y() + (v[2] / norm) * sigma_z();
  return std::cos(th) * identity(2) - Complex(0.0, std::sin(th)) * axis;
}

}  // namespace

// ---------------------------------------------------------------------------
// Ring model
// ---------------------------------------------------------------------------

BuiltModel build_circle_model(const CircleParams& p, TableNormalization norm) {
  if (p.nodes < 3) throw std::invalid_argument("build_circle_model: need at least 3 nodes");
  if (!(p.omega0 > 0.0)) throw std::invalid_argument("build_circle_model: omega0 must be positive");
  if (!(p.gamma_se > 0.0))
    throw std::invalid_argument("build_circle_model: gamma_se must be positive");
  if (p.n_mean < 0.0) throw std::invalid_argument("build_circle_model: n_mean must be non-negative");
  if (!(p.delta > 0.0)) throw std::invalid_argument("build_circle_model: delta must be positive");

  const int m = p.nodes;
  const double g = p.gamma_se;
  const double rate_down = g * (p.n_mean + 1.0);  // quantum released per hop forward
  const double rate_up = g * p.n_mean;            // quantum absorbed per hop backward
  if (p.delta * rate_down >= 1.0)
    throw std::invalid_argument("build_circle_model: delta * gamma_se * (n_mean + 1) must be < 1");

  BuiltModel built;
  MicroscopicModel& mod = built.model;
  mod.graph = make_circle(m);
  mod.node_hamiltonians.assign(m, (0.5 * p.omega0) * sigma_z());
  const Matrix h_res = p.lambda * (p.field_dir[0] * sigma_x() + p.field_dir[1] * sigma_y() +
                                   p.field_dir[2] * sigma_z());
  mod.residual_hamiltonians.assign(m, h_res);
  for (int i = 1; i <= m; ++i) mod.coins[{i, i % m + 1}] = sigma_minus();
  mod.bath = bath_at(p.n_mean, p.omega0, g);

  TransitionTable& t = built.table;
  t.dim = 2;
  t.graph = mod.graph;
  t.edge_ops.resize(t.graph.edges.size());
  t.loop_ops.resize(m);
  t.delta = p.delta;
  t.max_rate = rate_down;

  const std::string label_down = frequency_label(-p.omega0);
  const std::string label_up = frequency_label(p.omega0);
  for (int i = 1; i <= m; ++i) {
    const int right = i % m + 1;
    const int left = (i + m - 2) % m + 1;
    t.edge_ops[edge_index(t.graph, i, right)].push_back(
        {std::sqrt(p.delta * rate_down) * sigma_minus(), label_down});
    if (rate_up > 0.0)
      t.edge_ops[edge_index(t.graph, i, left)].push_back(
          {std::sqrt(p.delta * rate_up) * sigma_plus(), label_up});
  }

  // Loss is diagonal in the splitting basis: rate_up on the lower level (it
  // can only absorb), rate_down on the upper (it can only emit).
  if (norm == TableNormalization::truncated) {
    Matrix loop = identity(2);
    loop(0, 0) -= 0.5 * p.delta * rate_up;
    loop(1, 1) -= 0.5 * p.delta * rate_down;
    loop -= Complex(0.0, p.delta) * h_res;
    t.loop_ops.assign(m, loop);
  } else {
    Matrix survive = Matrix::Zero(2, 2);
    survive(0, 0) = std::sqrt(1.0 - p.delta * rate_up);
    survive(1, 1) = std::sqrt(1.0 - p.delta * rate_down);
    const Matrix loop = small_rotation(
        {p.lambda * p.field_dir[0], p.lambda * p.field_dir[1], p.lambda * p.field_dir[2]},
        p.delta) * survive;
    t.loop_ops.assign(m, loop);
  }
  return built;
}

// ---------------------------------------------------------------------------
// Chain model
// ---------------------------------------------------------------------------

BuiltModel build_chain_model(const ChainParams& p, TableNormalization norm) {
  if (p.nodes < 2) throw std::invalid_argument("build_chain_model: need at least 2 nodes");
  if (!(p.delta0 > 0.0)) throw std::invalid_argument("build_chain_model: delta0 must be positive");
  if (!(p.gamma_se > 0.0))
    throw std::invalid_argument("build_chain_model: gamma_se must be positive");
  if (p.n_mean < 0.0) throw std::invalid_argument("build_chain_model: n_mean must be non-negative");
  if (!(p.delta > 0.0)) throw std::invalid_argument("build_chain_model: delta must be positive");

  const int m = p.nodes;
  const double g = p.gamma_se;
  const double rate_down = g * (p.n_mean + 1.0);  // hop left, releasing delta0
  const double rate_up = g * p.n_mean;            // hop right, absorbing delta0
  const Matrix coin = p.alpha * sigma_z() + p.beta * identity(2);
  // Largest eigenvalue of coin^2 bounds the loss the walls see.
  const double s_max = std::max(std::abs(p.beta - p.alpha), std::abs(p.beta + p.alpha));
  if (p.delta * (rate_down + rate_up) * s_max * s_max >= 1.0)
    throw std::invalid_argument("build_chain_model: delta too large for these rates");

  BuiltModel built;
  MicroscopicModel& mod = built.model;
  mod.graph = make_chain(m);
  mod.node_hamiltonians.resize(m);
  for (int i = 1; i <= m; ++i)
    mod.node_hamiltonians[i - 1] = (p.eps0 + static_cast<double>(i) * p.delta0) * identity(2);
  for (int i = 1; i < m; ++i) mod.coins[{i, i + 1}] = coin;
  mod.bath = bath_at(p.n_mean, p.delta0, g);

  TransitionTable& t = built.table;
  t.dim = 2;
  t.graph = mod.graph;
  t.edge_ops.resize(t.graph.edges.size());
  t.loop_ops.resize(m);
  t.delta = p.delta;
  t.max_rate = rate_down;

  const std::string label_down = frequency_label(-p.delta0);
  const std::string label_up = frequency_label(p.delta0);
  for (int i = 1; i < m; ++i) {
    t.edge_ops[edge_index(t.graph, i + 1, i)].push_back(
        {std::sqrt(p.delta * rate_down) * coin, label_down});
    if (rate_up > 0.0)
      t.edge_ops[edge_index(t.graph, i, i + 1)].push_back(
          {std::sqrt(p.delta * rate_up) * coin, label_up});
  }

  // Per-node outflow rate: both hops in the interior, one at each wall.
  const Matrix coin_sq = coin * coin;
  for (int i = 1; i <= m; ++i) {
    double out_rate = rate_down + rate_up;
    if (i == 1) out_rate = rate_up;          // no left exit: cannot release
    else if (i == m) out_rate = rate_down;   // no right exit: cannot absorb
    if (norm == TableNormalization::truncated) {
      t.loop_ops[i - 1] = identity(2) - (0.5 * p.delta * out_rate) * coin_sq;
    } else {
      Matrix loop = Matrix::Zero(2, 2);
      loop(0, 0) = std::sqrt(1.0 - p.delta * out_rate * coin_sq(0, 0).real());
      loop(1, 1) = std::sqrt(1.0 - p.delta * out_rate * coin_sq(1, 1).real());
      t.loop_ops[i - 1] = loop;
    }
  }
  return built;
}

// ---------------------------------------------------------------------------
// Initial blocks and the classical cross-check
// ---------------------------------------------------------------------------

Matrix initial_state_named(const std::string& name, int dim) {
  if (dim < 1) throw std::invalid_argument("initial_state_named: dim must be positive");
  if (name == "maximally-mixed") return identity(dim) / static_cast<double>(dim);
  if (dim < 2)
    throw std::invalid_argument("initial_state_named: '" + name + "' needs dim >= 2");
  Matrix r = Matrix::Zero(dim, dim);
  if (name == "ground") {
    r(0, 0) = 1.0;
  } else if (name == "excited") {
    r(1, 1) = 1.0;
  } else if (name == "minus" || name == "plus") {
    if (dim != 2)
      throw std::invalid_argument("initial_state_named: '" + name + "' needs dim == 2");
    const double off = name == "minus" ? -0.5 : 0.5;
    r(0, 0) = r(1, 1) = 0.5;
    r(0, 1) = r(1, 0) = off;
  } else {
    throw std::invalid_argument(
        "initial_state_named: unknown name '" + name +
        "' (use maximally-mixed, ground, excited, minus, plus)");
  }
  return r;
}

ClassicalSeries chain_diagonal_recursion(int nodes, double gamma, double n_mean, double delta,
                                         int start, long n_steps, long record_every) {
  if (nodes < 2) throw std::invalid_argument("chain_diagonal_recursion: need at least 2 nodes");
  if (start < 1 || start > nodes)
    throw std::invalid_argument("chain_diagonal_recursion: start node out of range");
  if (n_steps < 0 || record_every <= 0)
    throw std::invalid_argument("chain_diagonal_recursion: bad step counts");
  const double pd = gamma * (n_mean + 1.0) * delta;  // hop-left probability
  const double pu = gamma * n_mean * delta;          // hop-right probability
  if (pd < 0.0 || pu < 0.0 || pd + pu > 1.0)
    throw std::invalid_argument("chain_diagonal_recursion: step probabilities out of range");

  std::vector<double> p(nodes, 0.0), q(nodes);
  p[start - 1] = 1.0;
  ClassicalSeries out;
  const auto record = [&](long k) {
    out.steps.push_back(k);
    out.occupation.push_back(p);
  };
  record(0);
  for (long k = 1; k <= n_steps; ++k) {
    for (int i = 0; i < nodes; ++i) {
      const double out_prob = (i == 0 ? pu : i == nodes - 1 ? pd : pd + pu);
      q[i] = (1.0 - out_prob) * p[i];
      if (i + 1 < nodes) q[i] += pd * p[i + 1];
      if (i - 1 >= 0) q[i] += pu * p[i - 1];
    }
    p.swap(q);
    if (k % record_every == 0 || k == n_steps) record(k);
  }
  return out;
}

}  // namespace oqw
