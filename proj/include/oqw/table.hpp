// oqw/table.hpp: transition-operator tables and the discrete-time walk engine.
#pragma once

#include "oqw/state.hpp"

#include <functional>
#include <string>

namespace oqw {

struct LabeledOp {
  Matrix op;
  std::string label;  // builder tag, e.g. "w=-1" for a frequency channel
};

// One jump-operator list per directed edge (parallel to graph.edges; an empty
// list means the zero operator) plus one loop operator per node. Multi-entry
// lists arise when several frequency channels share an edge; they stay
// separate operators in the map sum. Per source node j the normalization
// sum_k B_k^dag B_k over the loop and all outgoing entries must be I up to
// the table's normalization defect.
struct TransitionTable {
  int dim = 0;
  WalkGraph graph;
  std::vector<std::vector<LabeledOp>> edge_ops;
  std::vector<Matrix> loop_ops;
  // Builder metadata used for the default normalization tolerance; zero when
  // the table was assembled by hand.
  double delta = 0.0;
  double max_rate = 0.0;
};

// 10 * delta^2 * (1 + max_rate)^2 when builder metadata is present (the
// first-order tables are only normalized to O(delta^2), with a defect
// quadratic in the rate scale), else 1e-10 (exact tables).
double default_norm_tol(const TransitionTable& t);

// Max-norm normalization defect |sum B^dag B - I|_max per node (size M).
// Throws std::invalid_argument on structural problems (missing loop operator,
// mismatched dimensions, edge list length).
std::vector<double> normalization_defects(const TransitionTable& t);

// Nodes whose defect exceeds norm_tol, as (node, defect) pairs; empty means
// the table is valid. norm_tol < 0 selects default_norm_tol(t).
std::vector<std::pair<int, double>> validate_table(const TransitionTable& t,
                                                   double norm_tol = -1.0);

// Flattened per-node view used by the engines; ops2/loops2 mirror the
// operators as fixed-size 2x2 matrices when dim == 2.
struct CompiledTable {
  int dim = 0;
  int nodes = 0;
  struct Branch {
    int target = 0;  // 1-indexed
    Matrix op;
    std::string label;
    Eigen::Matrix2cd op2;
  };
  std::vector<std::vector<Branch>> outgoing;  // per source node
  std::vector<Matrix> loops;
  std::vector<Eigen::Matrix2cd> loops2;
};
CompiledTable compile(const TransitionTable& t);

// One map application rho_i' = sum_j B_j->i rho_j B_j->i^dag (loop included).
// No renormalization: trace drift is the caller's diagnostic.
WalkState step(const TransitionTable& t, const WalkState& s);

// Snapshots at steps 0, record_every, 2*record_every, ..., n_steps.
std::vector<WalkState> run(const TransitionTable& t, const WalkState& s0, long n_steps,
                           long record_every = 1);

// Memory-light variant: observer is called at the same recording points.
void run_observe(const TransitionTable& t, const WalkState& s0, long n_steps,
                 long record_every,
                 const std::function<void(long step, const WalkState&)>& observe);

}  // namespace oqw
