// oqw/observables.hpp: position moments, slope fits, and the collective
// moment oracle used to cross-check lattice runs.
#pragma once

#include "oqw/ode.hpp"
#include "oqw/state.hpp"

#include <vector>

namespace oqw {

// All moments are per unit trace (the raw total is reported alongside).
// Position is the node index, 1..M; coherence_x is sum_i tr(rho_i sigma_x)
// for dimension-2 blocks and 0 otherwise.
struct StateMoments {
  double total = 0.0;
  double mu = 0.0;
  double var = 0.0;
  double coherence_x = 0.0;
};
StateMoments moments_of_state(const WalkState& s);

// Trace mass sitting within `margin` nodes of the index boundary; a walk that
// started mid-lattice has wrapped (or hit the wall) once this is visible.
double edge_mass(const WalkState& s, int margin);

struct MomentSeries {
  std::vector<double> times, total_trace, mu, var, coherence_x;
  bool keep_occupation = false;
  std::vector<std::vector<double>> occupation;  // per-node trace mass / total
  void push(double t, const WalkState& s);
};
MomentSeries moments_from_snapshots(const std::vector<WalkState>& snaps,
                                    bool keep_occupation = false);

// Least-squares slope over the trailing window t >= t_last - f * span.
// Throws unless the window holds at least 10 points.
double fit_asymptotic_slope(const std::vector<double>& t, const std::vector<double>& y,
                            double window_fraction = 0.5);

// Long-time transport coefficients of the ring model with dissipative
// nearest-neighbor hopping at rate scale gamma, transverse drive lambda and
// bath occupation n_mean (c = 2 n_mean + 1, W^2 = 8 lambda^2 + gamma^2 c^2):
//   mean velocity     v_mu     = 4 gamma lambda^2 / W^2
//   variance rate     v_sigma2 = 4 gamma c lambda^2 (W^4 - 24 gamma^2 lambda^2) / W^6
//   steady internals  z = -gamma^2 c / W^2,  x = -4 lambda gamma / W^2
struct AsymptoticRates {
  double gamma = 0.0, lambda = 0.0, n_mean = 0.0;
  double omega_sq = 0.0;
  double v_mu = 0.0, v_sigma2 = 0.0;
  double z_steady = 0.0, x_steady = 0.0;
};
AsymptoticRates analytic_rates(double gamma, double lambda, double n_mean);

// Truncated-series variant of the variance rate with the quadratic
// correction at half weight. Kept for comparison output only: it disagrees
// with both the collective oracle and the lattice beyond small n_mean.
double variance_rate_alt_series(double gamma, double lambda, double n_mean);

// Collective-coordinate oracle: a closed 7-variable ODE system for the ring
// moments, independent of any lattice. Returns mu (offset by `start`) and
// variance on the integrator grid.
struct CollectiveSeries {
  std::vector<double> times, mu, var;
};
CollectiveSeries collective_oracle(double gamma, double lambda, double n_mean, double t_final,
                                   double dt, double start = 0.0, Scheme scheme = Scheme::rk4,
                                   long record_every = 1);

// Spectral pieces of the closed 2x2 block governing (Z, X) relaxation:
// eigenvalues lambda_pm = -(3/4) gamma c +- w/4 with w = sqrt(g^2 c^2 - 64
// lambda^2) (complex when the root is negative) and their spectral
// projectors. Throws when the eigenvalues collide.
struct CoherenceBlockSpectral {
  Complex lambda_plus, lambda_minus;
  Eigen::Matrix2d g2;
  Eigen::Matrix2cd proj_plus, proj_minus;
};
CoherenceBlockSpectral coherence_block_spectral(double gamma, double lambda, double n_mean);

}  // namespace oqw
