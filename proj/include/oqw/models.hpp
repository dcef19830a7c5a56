// oqw/models.hpp: the two worked models (dissipative ring, thermal ladder
// chain), each available through the reduction pipeline and as hand-assembled
// closed-form tables so the two routes can be compared operator by operator.
#pragma once

#include "oqw/micro.hpp"

#include <array>
#include <string>
#include <vector>

namespace oqw {

enum class TableNormalization { truncated, exact };
const char* normalization_name(TableNormalization n);

// Ring of two-level nodes: splitting omega0, hopping coin sigma_minus toward
// the next node, residual drive lambda * (field_dir . sigma), one thermal
// bath per edge at occupation n_mean (0 selects the zero-temperature bath).
struct CircleParams {
  int nodes = 101;
  double omega0 = 1.0;
  double gamma_se = 1.0;
  double lambda = 0.3;
  std::array<double, 3> field_dir = {0.0, 1.0, 0.0};
  double n_mean = 1.0;
  double delta = 0.05;
};

// Open chain of two-level nodes on an energy ladder eps0 + k * delta0 (so
// every hop exchanges quantum delta0 with the bath; de-excitation moves
// left), hopping coin alpha * sigma_z + beta * I.
struct ChainParams {
  int nodes = 501;
  double eps0 = 1.0;
  double delta0 = 1.0;
  double gamma_se = 1.0;
  double alpha = 1.0;
  double beta = 0.0;
  double n_mean = 1.0;
  double delta = 0.005;
};

struct BuiltModel {
  MicroscopicModel model;  // input for the reduction pipeline
  TransitionTable table;   // closed-form route, assembled directly
};

BuiltModel build_circle_model(const CircleParams& p, TableNormalization norm);
BuiltModel build_chain_model(const ChainParams& p, TableNormalization norm);

// Named initial blocks: "maximally-mixed", "ground", "excited", "minus",
// "plus" (the last four need dim == 2; "minus" has tr(rho sigma_x) = -1).
Matrix initial_state_named(const std::string& name, int dim);

// Classical two-rate hopping recursion on the chain's node occupancies
//   p_i' = (1 - gamma c delta) p_i + gamma (n+1) delta p_{i+1}
//                                  + gamma n delta p_{i-1},   c = 2n + 1,
// with one-sided loss at the walls. This is the exact diagonal dynamics of
// the chain table with |alpha| = 1, beta = 0 under exact normalization.
struct ClassicalSeries {
  std::vector<long> steps;
  std::vector<std::vector<double>> occupation;  // [record][node-1]
};
ClassicalSeries chain_diagonal_recursion(int nodes, double gamma, double n_mean, double delta,
                                         int start, long n_steps, long record_every = 1);

}  // namespace oqw
