#include "oqw/table.hpp"

#include "oqw/linalg.hpp"

#include <stdexcept>

namespace oqw {

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

void check_structure(const TransitionTable& t) {
  const int m = t.graph.node_count;
  if (m <= 0) throw std::invalid_argument("transition table: graph has no nodes");
  if (t.dim <= 0) throw std::invalid_argument("transition table: dim must be positive");
  if (static_cast<int>(t.loop_ops.size()) != m)
    throw std::invalid_argument("transition table: need one loop operator per node");
  if (t.edge_ops.size() != t.graph.edges.size())
    throw std::invalid_argument("transition table: edge_ops must parallel graph.edges");
  for (const Matrix& l : t.loop_ops)
    if (l.rows() != t.dim || l.cols() != t.dim)
      throw std::invalid_argument("transition table: loop operator dimension mismatch");
  for (const auto& list : t.edge_ops)
    for (const LabeledOp& e : list)
      if (e.op.rows() != t.dim || e.op.cols() != t.dim)
        throw std::invalid_argument("transition table: edge operator dimension mismatch");
}

}  // namespace

double default_norm_tol(const TransitionTable& t) {
  // The first-order defect is delta^2 |loss/2 + iH|^2, quadratic in the rate
  // scale; (1 + max_rate)^2 dominates it with headroom at small rates too.
  if (t.delta > 0.0 && t.max_rate > 0.0)
    return 10.0 * t.delta * t.delta * (1.0 + t.max_rate) * (1.0 + t.max_rate);
  return 1e-10;
}

std::vector<double> normalization_defects(const TransitionTable& t) {
  check_structure(t);
  const int m = t.graph.node_count;
  // Per source node: loop^dag loop + sum over outgoing edge ops.
  std::vector<Matrix> sums(m);
  for (int j = 0; j < m; ++j) sums[j] = t.loop_ops[j].adjoint() * t.loop_ops[j];
  for (std::size_t e = 0; e < t.graph.edges.size(); ++e) {
    const int j = t.graph.edges[e].first - 1;
    for (const LabeledOp& lo : t.edge_ops[e]) sums[j] += lo.op.adjoint() * lo.op;
  }
  std::vector<double> defects(m);
  const Matrix eye = identity(t.dim);
  for (int j = 0; j < m; ++j) defects[j] = max_abs(sums[j] - eye);
  return defects;
}

std::vector<std::pair<int, double>> validate_table(const TransitionTable& t, double norm_tol) {
  if (norm_tol < 0.0) norm_tol = default_norm_tol(t);
  const std::vector<double> defects = normalization_defects(t);
  std::vector<std::pair<int, double>> bad;
  for (int j = 0; j < static_cast<int>(defects.size()); ++j)
    if (defects[j] > norm_tol) bad.emplace_back(j + 1, defects[j]);
  return bad;
}

// ---------------------------------------------------------------------------
// Compilation and stepping
// ---------------------------------------------------------------------------

CompiledTable compile(const TransitionTable& t) {
  check_structure(t);
  CompiledTable c;
  c.dim = t.dim;
  c.nodes = t.graph.node_count;
  c.outgoing.resize(c.nodes);
  c.loops = t.loop_ops;
  for (std::size_t e = 0; e < t.graph.edges.size(); ++e) {
    const auto [from, to] = t.graph.edges[e];
    for (const LabeledOp& lo : t.edge_ops[e]) {
      CompiledTable::Branch b;
      b.target = to;
      b.op = lo.op;
      b.label = lo.label;
      if (c.dim == 2) b.op2 = lo.op;
      c.outgoing[from - 1].push_back(std::move(b));
    }
  }
  if (c.dim == 2) {
    c.loops2.reserve(c.loops.size());
    for (const Matrix& l : c.loops) c.loops2.emplace_back(l);
  }
  return c;
}

namespace {

// Dimension-2 kernel: fixed-size matrices keep the hot loop allocation-free.
void step_2x2(const CompiledTable& c, const std::vector<Matrix>& in,
              std::vector<Eigen::Matrix2cd>& out) {
  for (auto& b : out) b.setZero();
  Eigen::Matrix2cd rho, moved;
  for (int j = 0; j < c.nodes; ++j) {
    rho = in[j];
    out[j].noalias() += c.loops2[j] * rho * c.loops2[j].adjoint();
    for (const auto& br : c.outgoing[j]) {
      moved.noalias() = br.op2 * rho * br.op2.adjoint();
      out[br.target - 1] += moved;
    }
  }
}

void step_dyn(const CompiledTable& c, const std::vector<Matrix>& in, std::vector<Matrix>& out) {
  for (auto& b : out) b.setZero();
  for (int j = 0; j < c.nodes; ++j) {
    const Matrix& rho = in[j];
    out[j].noalias() += c.loops[j] * rho * c.loops[j].adjoint();
    for (const auto& br : c.outgoing[j]) out[br.target - 1] += br.op * rho * br.op.adjoint();
  }
}

void check_compatible(const CompiledTable& c, const WalkState& s) {
  if (s.dim != c.dim || static_cast<int>(s.blocks.size()) != c.nodes)
    throw std::invalid_argument("step: state does not match table layout");
}

}  // namespace

WalkState step(const TransitionTable& t, const WalkState& s) {
  const CompiledTable c = compile(t);
  check_compatible(c, s);
  WalkState out = s;
  if (c.dim == 2) {
    std::vector<Eigen::Matrix2cd> buf(c.nodes);
    step_2x2(c, s.blocks, buf);
    for (int j = 0; j < c.nodes; ++j) out.blocks[j] = buf[j];
  } else {
    step_dyn(c, s.blocks, out.blocks);
  }
  out.time = s.time + 1.0;
  return out;
}

void run_observe(const TransitionTable& t, const WalkState& s0, long n_steps, long record_every,
                 const std::function<void(long, const WalkState&)>& observe) {
  if (n_steps < 0) throw std::invalid_argument("run: n_steps must be non-negative");
  if (record_every <= 0) throw std::invalid_argument("run: record_every must be positive");
  const CompiledTable c = compile(t);
  check_compatible(c, s0);

  WalkState cur = s0;
  observe(0, cur);
  if (n_steps == 0) return;

  if (c.dim == 2) {
    // Ping-pong between fixed-size buffers; copy out only at recording points.
    std::vector<Eigen::Matrix2cd> a(c.nodes), b(c.nodes);
    for (int j = 0; j < c.nodes; ++j) a[j] = cur.blocks[j];
    std::vector<Matrix> view(c.nodes);
    for (long k = 1; k <= n_steps; ++k) {
      for (auto& blk : b) blk.setZero();
      Eigen::Matrix2cd moved;
      for (int j = 0; j < c.nodes; ++j) {
        const Eigen::Matrix2cd& rho = a[j];
        b[j].noalias() += c.loops2[j] * rho * c.loops2[j].adjoint();
        for (const auto& br : c.outgoing[j]) {
          moved.noalias() = br.op2 * rho * br.op2.adjoint();
          b[br.target - 1] += moved;
        }
      }
      a.swap(b);
      if (k % record_every == 0 || k == n_steps) {
        for (int j = 0; j < c.nodes; ++j) cur.blocks[j] = a[j];
        cur.time = static_cast<double>(k);
        observe(k, cur);
      }
    }
  } else {
    std::vector<Matrix> a = cur.blocks, b(c.nodes, Matrix::Zero(c.dim, c.dim));
    for (long k = 1; k <= n_steps; ++k) {
      step_dyn(c, a, b);
      a.swap(b);
      if (k % record_every == 0 || k == n_steps) {
        cur.blocks = a;
        cur.time = static_cast<double>(k);
        observe(k, cur);
      }
    }
  }
}

std::vector<WalkState> run(const TransitionTable& t, const WalkState& s0, long n_steps,
                           long record_every) {
  std::vector<WalkState> snaps;
  run_observe(t, s0, n_steps, record_every,
              [&snaps](long, const WalkState& s) { snaps.push_back(s); });
  return snaps;
}

}  // namespace oqw
