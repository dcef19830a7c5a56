#include "oqw/observables.hpp"

#include "oqw/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace oqw {

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

StateMoments moments_of_state(const WalkState& s) {
  if (s.blocks.empty()) throw std::invalid_argument("moments_of_state: empty state");
  StateMoments m;
  double m1 = 0.0, m2 = 0.0, cx = 0.0;
  for (std::size_t i = 0; i < s.blocks.size(); ++i) {
    const double p = s.blocks[i].trace().real();
    const double x = static_cast<double>(i + 1);
    m.total += p;
    m1 += x * p;
    m2 += x * x * p;
    // tr(rho sigma_x) = 2 Re rho_01 for a 2x2 block.
    if (s.dim == 2) cx += 2.0 * s.blocks[i](0, 1).real();
  }
  if (!(m.total > 0.0)) throw std::invalid_argument("moments_of_state: non-positive total trace");
  m.mu = m1 / m.total;
  m.var = m2 / m.total - m.mu * m.mu;
  m.coherence_x = cx / m.total;
  return m;
}

double edge_mass(const WalkState& s, int margin) {
  const int nodes = static_cast<int>(s.blocks.size());
  if (margin < 0 || 2 * margin > nodes)
    throw std::invalid_argument("edge_mass: margin out of range");
  double mass = 0.0;
  for (int i = 0; i < margin; ++i)
    mass += s.blocks[i].trace().real() + s.blocks[nodes - 1 - i].trace().real();
  return mass;
}

void MomentSeries::push(double t, const WalkState& s) {
  const StateMoments m = moments_of_state(s);
  times.push_back(t);
  total_trace.push_back(m.total);
  mu.push_back(m.mu);
  var.push_back(m.var);
  coherence_x.push_back(m.coherence_x);
  if (keep_occupation) {
    std::vector<double> row(s.blocks.size());
    for (std::size_t i = 0; i < s.blocks.size(); ++i)
      row[i] = s.blocks[i].trace().real() / m.total;
    occupation.push_back(std::move(row));
  }
}

MomentSeries moments_from_snapshots(const std::vector<WalkState>& snaps, bool keep_occupation) {
  if (snaps.empty()) throw std::invalid_argument("moments_from_snapshots: no snapshots");
  MomentSeries out;
  out.keep_occupation = keep_occupation;
  for (const WalkState& s : snaps) out.push(s.time, s);
  return out;
}

double fit_asymptotic_slope(const std::vector<double>& t, const std::vector<double>& y,
                            double window_fraction) {
  if (t.size() != y.size()) throw std::invalid_argument("fit_asymptotic_slope: length mismatch");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw std::invalid_argument("fit_asymptotic_slope: window_fraction must be in (0, 1]");
  if (t.empty()) throw std::invalid_argument("fit_asymptotic_slope: empty series");
  const double cutoff = t.back() - window_fraction * (t.back() - t.front());
  double st = 0.0;
  long n = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= cutoff) {
      st += t[i];
      ++n;
    }
  if (n < 10)
    throw std::invalid_argument("fit_asymptotic_slope: need at least 10 points in the window");
  const double tbar = st / static_cast<double>(n);
  double num = 0.0, den = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= cutoff) ybar += y[i];
  ybar /= static_cast<double>(n);
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= cutoff) {
      num += (t[i] - tbar) * (y[i] - ybar);
      den += (t[i] - tbar) * (t[i] - tbar);
    }
  if (!(den > 0.0)) throw std::invalid_argument("fit_asymptotic_slope: degenerate time window");
  return num / den;
}

// ---------------------------------------------------------------------------
// Closed-form transport rates
// ---------------------------------------------------------------------------

AsymptoticRates analytic_rates(double gamma, double lambda, double n_mean) {
  if (!(gamma > 0.0)) throw std::invalid_argument("analytic_rates: gamma must be positive");
  if (n_mean < 0.0) throw std::invalid_argument("analytic_rates: n_mean must be non-negative");
  const double c = 2.0 * n_mean + 1.0;
  const double w2 = 8.0 * lambda * lambda + gamma * gamma * c * c;
  AsymptoticRates r;
  r.gamma = gamma;
  r.lambda = lambda;
  r.n_mean = n_mean;
  r.omega_sq = w2;
  r.v_mu = 4.0 * gamma * lambda * lambda / w2;
  r.v_sigma2 = 4.0 * gamma * c * lambda * lambda *
               (w2 * w2 - 24.0 * gamma * gamma * lambda * lambda) / (w2 * w2 * w2);
  r.z_steady = -gamma * gamma * c / w2;
  r.x_steady = -4.0 * lambda * gamma / w2;
  return r;
}

double variance_rate_alt_series(double gamma, double lambda, double n_mean) {
  const double c = 2.0 * n_mean + 1.0;
  const double w2 = 8.0 * lambda * lambda + gamma * gamma * c * c;
  const double g2 = gamma * gamma;
  return 0.5 * gamma * c - g2 * gamma * c * (n_mean * n_mean + n_mean + 1.0) / w2 +
         3.0 * g2 * g2 * gamma * c * c * c / (w2 * w2) -
         1.5 * g2 * g2 * g2 * gamma * std::pow(c, 5) / (w2 * w2 * w2);
}

// ---------------------------------------------------------------------------
// Collective-coordinate oracle
// ---------------------------------------------------------------------------

namespace {

// y = (Z, X, P, P1, Z1, X1, P2): total internal polarizations, the total
// trace mass, and the position-weighted first/second moments.
struct Collective {
  double gamma, lambda, c;
  void rhs(const double* y, double* dy) const {
    const double g = gamma, l = lambda;
    dy[0] = -g * c * y[0] - 2.0 * l * y[1] - g * y[2];
    dy[1] = 2.0 * l * y[0] - 0.5 * g * c * y[1];
    dy[2] = 0.0;
    dy[3] = 0.5 * g * c * y[0] + 0.5 * g * y[2];
    dy[4] = -g * c * y[4] - 2.0 * l * y[5] - (g * y[3] + 0.5 * g * y[0] + 0.5 * g * c * y[2]);
    dy[5] = 2.0 * l * y[4] - 0.5 * g * c * y[5];
    dy[6] = g * y[3] + g * c * y[4] + 0.5 * g * y[0] + 0.5 * g * c * y[2];
  }
};

}  // namespace

CollectiveSeries collective_oracle(double gamma, double lambda, double n_mean, double t_final,
                                   double dt, double start, Scheme scheme, long record_every) {
  if (!(gamma > 0.0)) throw std::invalid_argument("collective_oracle: gamma must be positive");
  if (n_mean < 0.0) throw std::invalid_argument("collective_oracle: n_mean must be non-negative");
  if (!(dt > 0.0)) throw std::invalid_argument("collective_oracle: dt must be positive");
  if (t_final < 0.0) throw std::invalid_argument("collective_oracle: t_final must be non-negative");
  if (record_every <= 0)
    throw std::invalid_argument("collective_oracle: record_every must be positive");
  const long n_steps = std::llround(t_final / dt);
  if (std::abs(static_cast<double>(n_steps) * dt - t_final) > 1e-9 * std::max(1.0, t_final))
    throw std::invalid_argument("collective_oracle: t_final must be a whole number of dt steps");

  const Collective sys{gamma, lambda, 2.0 * n_mean + 1.0};
  double y[7] = {0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  double k1[7], k2[7], k3[7], k4[7], tmp[7];

  CollectiveSeries out;
  const auto record = [&](long step) {
    out.times.push_back(static_cast<double>(step) * dt);
    out.mu.push_back(y[3] + start);
    out.var.push_back(y[6] - y[3] * y[3]);
  };
  record(0);
  for (long s = 1; s <= n_steps; ++s) {
    sys.rhs(y, k1);
    if (scheme == Scheme::euler) {
      for (int i = 0; i < 7; ++i) y[i] += dt * k1[i];
    } else {
      for (int i = 0; i < 7; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
      sys.rhs(tmp, k2);
      for (int i = 0; i < 7; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
      sys.rhs(tmp, k3);
      for (int i = 0; i < 7; ++i) tmp[i] = y[i] + dt * k3[i];
      sys.rhs(tmp, k4);
      for (int i = 0; i < 7; ++i)
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (s % record_every == 0 || s == n_steps) record(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spectral form of the (Z, X) relaxation block
// ---------------------------------------------------------------------------

CoherenceBlockSpectral coherence_block_spectral(double gamma, double lambda, double n_mean) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("coherence_block_spectral: gamma must be positive");
  if (n_mean < 0.0)
    throw std::invalid_argument("coherence_block_spectral: n_mean must be non-negative");
  const double c = 2.0 * n_mean + 1.0;
  const double disc = gamma * gamma * c * c - 64.0 * lambda * lambda;
  if (disc == 0.0)
    throw std::invalid_argument("coherence_block_spectral: degenerate eigenvalues");
  const Complex w = std::sqrt(Complex(disc, 0.0));

  CoherenceBlockSpectral r;
  r.g2 << -gamma * c, -2.0 * lambda, 2.0 * lambda, -0.5 * gamma * c;
  r.lambda_plus = Complex(-0.75 * gamma * c, 0.0) + 0.25 * w;
  r.lambda_minus = Complex(-0.75 * gamma * c, 0.0) - 0.25 * w;
  const Eigen::Matrix2cd gc = r.g2.cast<Complex>();
  const Eigen::Matrix2cd eye = Eigen::Matrix2cd::Identity();
  r.proj_plus = (2.0 / w) * (gc - r.lambda_minus * eye);
  r.proj_minus = (-2.0 / w) * (gc - r.lambda_plus * eye);
  return r;
}

}  // namespace oqw
