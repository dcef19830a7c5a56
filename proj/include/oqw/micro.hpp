// oqw/micro.hpp: thermal-bath reduction of a node-graph model to jump
// channels, and first-order / exactly-normalized transition tables.
#pragma once

#include "oqw/table.hpp"

#include <map>
#include <utility>
#include <vector>

namespace oqw {

// ---------------------------------------------------------------------------
// Bath description
// ---------------------------------------------------------------------------

// One thermal bath per undirected edge. Exactly one temperature mode must be
// chosen:
//   zero_temperature          occupation is 0 at every frequency
//   inv_temperature > 0       occupation(w) = 1 / (exp(beta w) - 1)
//   n_mean >= 0               occupation fixed to n_mean at
//                             reference_frequency (> 0 required); other
//                             frequencies use the implied beta
//                             log(1 + 1/n_mean) / reference_frequency
// In n_mean mode, occupation(reference_frequency) returns the stored n_mean
// bit-exactly so rate comparisons do not pick up transcendental round-trips.
struct BathSpec {
  double gamma_se = 1.0;  // coupling rate scale, uniform default
  std::map<std::pair<int, int>, double> gamma_se_edges;  // keyed {min,max}

  bool zero_temperature = false;
  double inv_temperature = 0.0;     // beta; 0 means unset
  double n_mean = -1.0;             // mean occupation; negative means unset
  double reference_frequency = 0.0; // required with n_mean; optional with beta
};

void validate_bath(const BathSpec& b);

// Mean occupation at |w| = omega_abs (> 0). Zero frequency is singular at
// finite temperature and throws; callers wanting the degenerate-channel
// convention use thermal_rate.
double occupation(const BathSpec& b, double omega_abs);

double gamma_se_for(const BathSpec& b, std::pair<int, int> edge);

// Channel rate for the signed transition frequency on a directed edge:
//   w < 0 (energy released to the bath)  gamma * (occupation(|w|) + 1)
//   w > 0 (energy drawn from the bath)   gamma * occupation(w)
//   w == 0                               gamma * (n_ref + 1/2)
// where n_ref is the occupation at the bath's reference frequency (0 at zero
// temperature). A zero-frequency channel with finite beta and no reference
// frequency is singular and throws.
double thermal_rate(const BathSpec& b, std::pair<int, int> edge, double omega_signed);

// ---------------------------------------------------------------------------
// Node-graph model
// ---------------------------------------------------------------------------

// Internal dynamics per node plus one coupling operator ("coin") per directed
// edge. For each undirected pair it is enough to give one direction: the
// reverse defaults to the adjoint. If both directions are present they must
// be mutual adjoints to 1e-12.
struct MicroscopicModel {
  WalkGraph graph;
  std::vector<Matrix> node_hamiltonians;            // Omega_i, Hermitian
  std::map<std::pair<int, int>, Matrix> coins;      // keyed (from, to)
  std::vector<Matrix> residual_hamiltonians;        // optional H_i; empty = none
  BathSpec bath;
};

// All directed edges resolved to explicit coins (adjoint fill-in applied).
std::map<std::pair<int, int>, Matrix> resolved_coins(const MicroscopicModel& m);

// ---------------------------------------------------------------------------
// Frequency decomposition
// ---------------------------------------------------------------------------

struct EigenOperator {
  double omega = 0.0;  // target eigenvalue minus source eigenvalue
  Matrix op;           // P_target * coin * P_source summed over matching pairs
};

struct EigenOperatorSet {
  // Per directed edge, eigenoperators sorted by ascending frequency. Their
  // sum reproduces the coin exactly (up to the drop threshold).
  std::map<std::pair<int, int>, std::vector<EigenOperator>> by_edge;
};

// Splits each coin across the spectral projectors of the source and target
// node Hamiltonians and groups terms by transition frequency. Frequencies
// closer than cluster_tol merge; a merged frequency within cluster_tol of 0
// snaps to exactly 0. Negative cluster_tol selects
// 1e-9 * max(1, largest |eigenvalue|). Operators with max-norm below
// 1e-14 * max(1, |coin|_max) are dropped.
EigenOperatorSet eigen_decompose_coins(const MicroscopicModel& m, double cluster_tol = -1.0);

// ---------------------------------------------------------------------------
// Jump channels and generator
// ---------------------------------------------------------------------------

struct JumpChannel {
  int source = 0;
  int target = 0;
  double omega = 0.0;
  double rate = 0.0;
  Matrix op;
};

// Continuous-time generator data: d rho_i/dt =
//   -i [H_i, rho_i] + sum_{channels j->i} rate L rho_j L^dag
//   - 1/2 {loss_i, rho_i},    loss_j = sum_{channels from j} rate L^dag L.
struct GeneratorSpec {
  int dim = 0;
  WalkGraph graph;
  std::vector<JumpChannel> channels;   // zero-rate channels dropped
  std::vector<Matrix> hamiltonians;    // residual H_i (zero if none given)
  std::vector<Matrix> loss;            // per source node
};

GeneratorSpec build_generator(const MicroscopicModel& m, const EigenOperatorSet& eops,
                              const BathSpec& bath);
GeneratorSpec build_generator(const MicroscopicModel& m, const EigenOperatorSet& eops);
GeneratorSpec build_generator(const MicroscopicModel& m);  // decompose + build

// ---------------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------------

// Channel label used by the discretizers, "w=<frequency>" at 9 significant
// digits; hand-built tables can emit the same tags.
std::string frequency_label(double omega);

// First-order table for time step delta:
//   edge op  sqrt(delta * rate) * L           (label "w=<frequency>")
//   loop op  I - (delta/2) * loss_j - i delta H_j
// Normalized to O(delta^2); default_norm_tol covers the residual. Throws when
// delta * (largest loss rate) reaches 1 (delta too large) or a loop operator
// exceeds its first-order norm bound (inconsistent generator).
TransitionTable discretize(const GeneratorSpec& g, double delta);

// Same edge ops, but loop op exp(-i delta H_j) * sqrt(I - delta * loss_j):
// the table then satisfies the normalization identity to machine precision
// while matching the first-order table to O(delta^2). Throws if
// I - delta * loss_j is not positive semidefinite.
TransitionTable discretize_exact(const GeneratorSpec& g, double delta);

}  // namespace oqw
