// oqw/ode.hpp: continuous-time integration of the jump-channel generator.
#pragma once

#include "oqw/micro.hpp"
#include "oqw/state.hpp"

#include <functional>
#include <vector>

namespace oqw {

enum class Scheme { euler, rk4 };
const char* scheme_name(Scheme s);

struct IntegratorConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::rk4;
  double t_final = 1.0;      // must be a whole number of steps
  long record_every = 1;     // observer cadence, in steps
};

// Largest eigenvalue over the per-node loss operators: the stiffness scale
// that bounds the usable step size.
double max_loss_rate(const GeneratorSpec& g);

// Time derivative of every block:
//   d rho_i = -i [H_i, rho_i] - 1/2 {loss_i, rho_i}
//             + sum_{channels j->i} rate * L rho_j L^dag.
// The result is blockwise Hermitian and sums to zero total trace.
std::vector<Matrix> rhs(const GeneratorSpec& g, const WalkState& s);

struct IntegrationReport {
  double max_trace_dev = 0.0;        // |total trace - initial| over recordings
  double min_block_eigenvalue = 0.0; // most negative block eigenvalue seen
};

// Fixed-step integration from s0 to t_final. The observer fires at t = 0,
// every record_every steps, and at the final step. At each recorded time the
// total trace must stay within 1e-8 of its initial value and no block
// eigenvalue may fall below -1e-7; violations throw std::runtime_error.
// Preflight rejects dt * max_loss_rate beyond 0.1 (euler) or 0.5 (rk4).
IntegrationReport integrate_observe(
    const GeneratorSpec& g, const WalkState& s0, const IntegratorConfig& cfg,
    const std::function<void(double t, const WalkState&)>& observe);

// Snapshot-collecting variant.
std::vector<WalkState> integrate(const GeneratorSpec& g, const WalkState& s0,
                                 const IntegratorConfig& cfg,
                                 IntegrationReport* report = nullptr);

}  // namespace oqw
