// oqw/state.hpp: block-diagonal walker states (one density block per node).
#pragma once

#include "oqw/graph.hpp"
#include "oqw/linalg.hpp"

namespace oqw {

// Internal density matrix attached to one node.
struct DensityBlock {
  Matrix mat;
  int node = 0;
};

// The full walker state: blocks[k] lives on node k+1. `time` is the physical
// time of a continuous run or the step count of a discrete one.
struct WalkState {
  int dim = 0;
  double time = 0.0;
  std::vector<Matrix> blocks;
};

// All weight on `node`, internal state rho0 (trace 1 expected).
WalkState make_point_state(const WalkGraph& g, int node, Matrix rho0);

const Matrix& block(const WalkState& s, int node);
Matrix& block(WalkState& s, int node);

double total_trace(const WalkState& s);

struct StateDefects {
  double trace_dev = 0;        // |sum_i Tr rho_i - 1|
  double min_eigenvalue = 0;   // over all blocks
  double hermiticity_dev = 0;  // max over blocks of |rho - rho^dag|_max
};
StateDefects state_defects(const WalkState& s);

// Throws std::runtime_error when the trace or positivity invariant is broken.
void validate_state(const WalkState& s, double trace_tol = 1e-9, double psd_tol = 1e-9);

}  // namespace oqw
