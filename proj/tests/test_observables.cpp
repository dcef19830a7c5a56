#include "oqw/observables.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace oqw;

TEST_SUITE("observables") {

TEST_CASE("moments of a two-block state") {
  WalkState s;
  s.dim = 2;
  s.blocks.assign(4, Matrix::Zero(2, 2));
  Matrix b1(2, 2);
  b1 << 0.3, 0.1, 0.1, 0.2;  // trace 0.5, off-diagonal real part 0.1
  s.blocks[0] = b1;
  s.blocks[2] = 0.25 * identity(2);  // trace 0.5 on node 3
  const StateMoments m = moments_of_state(s);
  CHECK(m.total == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.mu == doctest::Approx(2.0).epsilon(1e-14));
  // half the mass at node 1, half at node 3: spread (+-1)^2 around mu = 2
  CHECK(m.var == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.coherence_x == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("moments are per unit trace") {
  WalkState s;
  s.dim = 2;
  s.blocks.assign(3, Matrix::Zero(2, 2));
  s.blocks[1] = 0.2 * identity(2);  // total trace 0.4, all on node 2
  const StateMoments m = moments_of_state(s);
  CHECK(m.total == doctest::Approx(0.4));
  CHECK(m.mu == doctest::Approx(2.0));
  CHECK(m.var == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("edge mass sees only the boundary margin") {
  WalkState s;
  s.dim = 2;
  s.blocks.assign(10, Matrix::Zero(2, 2));
  s.blocks[0] = 0.1 * identity(2);   // node 1: mass 0.2
  s.blocks[4] = 0.25 * identity(2);  // node 5: interior
  s.blocks[9] = 0.05 * identity(2);  // node 10: mass 0.1
  CHECK(edge_mass(s, 1) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(edge_mass(s, 4) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(edge_mass(s, 5) == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("series push records occupation when asked") {
  WalkState s;
  s.dim = 2;
  s.blocks.assign(3, Matrix::Zero(2, 2));
  s.blocks[1] = 0.5 * identity(2);
  MomentSeries ms;
  ms.keep_occupation = true;
  ms.push(0.0, s);
  REQUIRE(ms.times.size() == 1);
  REQUIRE(ms.occupation.size() == 1);
  CHECK(ms.occupation[0][1] == doctest::Approx(1.0));  // normalized per total
  CHECK(ms.occupation[0][0] == doctest::Approx(0.0));
  CHECK(ms.mu[0] == doctest::Approx(2.0));
}

TEST_CASE("slope fit is exact on affine data and guards the window") {
  std::vector<double> t, y, q;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(0.1 * k);
    y.push_back(3.0 * t.back() + 1.0);
    q.push_back(t.back() * t.back());
  }
  CHECK(fit_asymptotic_slope(t, y, 0.5) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit_asymptotic_slope(t, y, 0.1) == doctest::Approx(3.0).epsilon(1e-12));
  // least squares on t^2 over a window [a, b] slopes to a + b
  CHECK(fit_asymptotic_slope(t, q, 0.5) == doctest::Approx(15.0).epsilon(1e-3));
  CHECK_THROWS_AS(fit_asymptotic_slope(t, y, 0.005), std::invalid_argument);  // < 10 points
  std::vector<double> tiny(t.begin(), t.begin() + 5), ytiny(y.begin(), y.begin() + 5);
  CHECK_THROWS_AS(fit_asymptotic_slope(tiny, ytiny, 1.0), std::invalid_argument);
}

TEST_CASE("closed-form rates satisfy their internal identities") {
  for (double n_mean : {0.0, 0.5, 1.0, 10.0}) {
    for (double lambda : {0.1, 0.3}) {
      const double gamma = 1.3;
      const AsymptoticRates r = analytic_rates(gamma, lambda, n_mean);
      const double c = 2.0 * n_mean + 1.0;
      const double w2 = 8.0 * lambda * lambda + gamma * gamma * c * c;
      CHECK(r.omega_sq == doctest::Approx(w2).epsilon(1e-15));
      CHECK(r.v_mu == doctest::Approx(4.0 * gamma * lambda * lambda / w2).epsilon(1e-15));
      CHECK(r.z_steady == doctest::Approx(-gamma * gamma * c / w2).epsilon(1e-15));
      CHECK(r.x_steady == doctest::Approx(-4.0 * lambda * gamma / w2).epsilon(1e-15));
      // drift rate equals the steady-state balance (gamma c / 2) z + gamma / 2
      CHECK(r.v_mu ==
            doctest::Approx(0.5 * gamma * c * r.z_steady + 0.5 * gamma).epsilon(1e-12));
      const double w4 = w2 * w2;
      CHECK(r.v_sigma2 ==
            doctest::Approx(4.0 * gamma * c * lambda * lambda *
                            (w4 - 24.0 * gamma * gamma * lambda * lambda) / (w4 * w2))
                .epsilon(1e-15));
    }
  }
}

TEST_CASE("collective oracle relaxes onto the closed-form rates") {
  for (double n_mean : {0.0, 1.0}) {
    const double gamma = 1.0, lambda = 0.3;
    const CollectiveSeries cs =
        collective_oracle(gamma, lambda, n_mean, 2000.0, 0.02, 0.0, Scheme::rk4, 10);
    const AsymptoticRates r = analytic_rates(gamma, lambda, n_mean);
    const double f_mu = fit_asymptotic_slope(cs.times, cs.mu, 0.5);
    const double f_var = fit_asymptotic_slope(cs.times, cs.var, 0.5);
    CHECK(f_mu == doctest::Approx(r.v_mu).epsilon(1e-7));
    CHECK(f_var == doctest::Approx(r.v_sigma2).epsilon(1e-5));
  }
}

TEST_CASE("oracle starts at the given origin with zero variance") {
  const CollectiveSeries cs = collective_oracle(1.0, 0.3, 1.0, 1.0, 0.01, 251.0);
  CHECK(cs.times.front() == doctest::Approx(0.0));
  CHECK(cs.mu.front() == doctest::Approx(251.0).epsilon(1e-14));
  CHECK(cs.var.front() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(cs.mu.back() > 251.0);  // drifts upward
}

TEST_CASE("oracle euler converges to rk4 at first order") {
  const CollectiveSeries r = collective_oracle(1.0, 0.3, 0.0, 50.0, 0.01, 0.0, Scheme::rk4);
  const CollectiveSeries e1 = collective_oracle(1.0, 0.3, 0.0, 50.0, 0.01, 0.0, Scheme::euler);
  const CollectiveSeries e2 =
      collective_oracle(1.0, 0.3, 0.0, 50.0, 0.005, 0.0, Scheme::euler);
  // rk4 at this step is exact to ~1e-9, so the gaps are euler's global error
  const double g1 = std::abs(e1.var.back() - r.var.back());
  const double g2 = std::abs(e2.var.back() - r.var.back());
  CHECK(g1 / g2 == doctest::Approx(2.0).epsilon(0.15));
  CHECK(g1 < 0.05 * r.var.back());
  CHECK(std::abs(e1.mu.back() - r.mu.back()) < 0.05 * std::abs(r.mu.back()) + 1e-6);
}

TEST_CASE("alt variance series has the wrong shape, not just the wrong scale") {
  // kept for comparison output: it disagrees with the closed form everywhere
  CHECK(variance_rate_alt_series(1.0, 0.3, 1.0) >
        5.0 * analytic_rates(1.0, 0.3, 1.0).v_sigma2);
  // the closed form peaks at moderate occupation and falls off; the alt
  // series keeps growing with n_mean
  const auto v = [](double n) { return analytic_rates(1.0, 0.3, n).v_sigma2; };
  const auto a = [](double n) { return variance_rate_alt_series(1.0, 0.3, n); };
  CHECK(v(0.35) > v(0.01));
  CHECK(v(0.35) > v(100.0));
  CHECK(a(0.01) < a(0.35));
  CHECK(a(0.35) < a(100.0));
}

TEST_CASE("relaxation block spectral decomposition") {
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> ug(0.2, 2.0), ul(0.05, 1.0), un(0.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double gamma = ug(gen), lambda = ul(gen), n_mean = un(gen);
    const double c = 2.0 * n_mean + 1.0;
    if (std::abs(gamma * gamma * c * c - 64.0 * lambda * lambda) < 1e-6) continue;
    const CoherenceBlockSpectral sp = coherence_block_spectral(gamma, lambda, n_mean);
    const Eigen::Matrix2cd g = sp.g2.cast<Complex>();
    const Eigen::Matrix2cd eye = Eigen::Matrix2cd::Identity();
    CHECK((sp.proj_plus + sp.proj_minus - eye).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((sp.proj_plus * sp.proj_plus - sp.proj_plus).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((sp.proj_minus * sp.proj_minus - sp.proj_minus).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((sp.proj_plus * sp.proj_minus).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::Matrix2cd rebuilt =
        sp.lambda_plus * sp.proj_plus + sp.lambda_minus * sp.proj_minus;
    CHECK((rebuilt - g).cwiseAbs().maxCoeff() < 1e-10);
    // trace and determinant identities of the block
    CHECK(std::abs(sp.lambda_plus + sp.lambda_minus - Complex(-1.5 * gamma * c, 0)) < 1e-10);
    const double w2 = 8.0 * lambda * lambda + gamma * gamma * c * c;
    CHECK(std::abs(sp.lambda_plus * sp.lambda_minus - Complex(0.5 * w2, 0)) < 1e-9);
  }
  // the decomposition is singular when the two eigenvalues collide
  CHECK_THROWS_AS(coherence_block_spectral(1.0, 0.125, 0.0), std::invalid_argument);
}

}  // TEST_SUITE
