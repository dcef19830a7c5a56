// oqw/traj.hpp: quantum-trajectory unraveling of a transition table.
#pragma once

#include "oqw/table.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace oqw {

// Small deterministic 64-bit generator (splitmix64). Chosen over the stdlib
// engines because the full stream, including the uint64 -> double mapping,
// is pinned by these constants on every platform; per-trajectory seeding is
// plain seed arithmetic.
struct SplitMix64 {
  std::uint64_t state = 0;
  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// One stochastic map application: outcome k (the loop, slot -1, then the
// outgoing branches in compiled order, slots 0, 1, ...) is drawn with
// probability p_k = Re tr(B_k rho B_k^dag) / sum_k p_k, and the state
// collapses to the chosen branch, renormalized to unit trace. prob_sum
// returns sum_k p_k (1 up to the table's normalization defect). Throws when
// every outcome probability vanishes.
struct UnravelOutcome {
  int node = 0;
  Matrix state;
  int op_slot = -1;
  double prob_sum = 0.0;
};
UnravelOutcome unravel_step(const CompiledTable& c, int node, const Matrix& rho, SplitMix64& rng);

struct TrajPoint {
  long step = 0;
  int node = 0;
  int op_slot = -1;               // -1: loop (or the initial point)
  std::string label;              // "start", "stay", or "to <node> [...]"
  Matrix state;                   // normalized conditional state
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::vector<TrajPoint> points;  // steps 0, record_every, ..., n_steps
  long moves_up = 0;              // nearest-neighbor motion, wrap-aware
  long moves_down = 0;
  long stays = 0;
  double max_prob_defect = 0.0;   // max |prob_sum - 1| along the path
};

TrajectoryRecord run_trajectory(const TransitionTable& t, int start, const Matrix& rho0,
                                long n_steps, std::uint64_t seed, long record_every = 1);

// Position histogram over n_traj independent trajectories with seeds
// base_seed, base_seed + 1, .... The reduction is integer counting, so the
// result is identical however many workers run (OQW_THREADS caps the pool).
struct EnsembleStats {
  int n_traj = 0;
  std::vector<long> record_steps;
  std::vector<std::vector<long>> histogram;  // [record][node-1]
  std::vector<double> mean, var;             // node-index moments per record
  long moves_up = 0, moves_down = 0, stays = 0;
  double max_prob_defect = 0.0;
};

EnsembleStats run_ensemble(const TransitionTable& t, int start, const Matrix& rho0, long n_steps,
                           int n_traj, std::uint64_t base_seed, long record_every = 1);

}  // namespace oqw
