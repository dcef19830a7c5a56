#include "oqw/micro.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace oqw;

namespace {

BathSpec bath_n(double n_mean, double ref) {
  BathSpec b;
  b.n_mean = n_mean;
  b.reference_frequency = ref;
  return b;
}

BathSpec bath_t0() {
  BathSpec b;
  b.zero_temperature = true;
  return b;
}

// Two nodes, one undirected pair, lowering coin, level splitting omega0.
MicroscopicModel two_level_pair(double omega0, BathSpec bath) {
  MicroscopicModel m;
  m.graph = make_chain(2);
  m.node_hamiltonians.assign(2, (0.5 * omega0) * sigma_z());
  m.coins[{1, 2}] = sigma_minus();
  m.bath = std::move(bath);
  return m;
}

}  // namespace

TEST_SUITE("micro") {

TEST_CASE("bath requires exactly one temperature mode") {
  CHECK_THROWS_AS(validate_bath(BathSpec{}), std::invalid_argument);  // none chosen
  BathSpec two = bath_n(1.0, 1.0);
  two.zero_temperature = true;
  CHECK_THROWS_AS(validate_bath(two), std::invalid_argument);
  BathSpec no_ref;
  no_ref.n_mean = 1.0;
  CHECK_THROWS_AS(validate_bath(no_ref), std::invalid_argument);
  BathSpec bad_gamma = bath_t0();
  bad_gamma.gamma_se = 0.0;
  CHECK_THROWS_AS(validate_bath(bad_gamma), std::invalid_argument);
  CHECK_NOTHROW(validate_bath(bath_t0()));
  CHECK_NOTHROW(validate_bath(bath_n(0.0, 2.0)));
  BathSpec beta;
  beta.inv_temperature = 1.5;
  CHECK_NOTHROW(validate_bath(beta));
}

TEST_CASE("occupation is exact at the pinned frequency and thermal elsewhere") {
  const BathSpec b = bath_n(1.0, 1.0);
  CHECK(occupation(b, 1.0) == 1.0);  // bit-exact, no transcendental round trip
  // implied beta = log 2, so occupation(2) = 1 / (4 - 1)
  CHECK(occupation(b, 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(occupation(bath_t0(), 0.7) == 0.0);
  CHECK(occupation(bath_t0(), 0.0) == 0.0);
  CHECK(occupation(bath_n(0.0, 1.0), 0.5) == 0.0);

  BathSpec beta;
  beta.inv_temperature = 1.0;
  CHECK(occupation(beta, 1.0) == doctest::Approx(1.0 / std::expm1(1.0)).epsilon(1e-15));
  CHECK_THROWS_AS(occupation(beta, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(occupation(b, -1.0), std::invalid_argument);
}

TEST_CASE("channel rates: release n+1, absorb n, degenerate n_ref + 1/2") {
  const BathSpec b = bath_n(1.0, 1.0);
  CHECK(thermal_rate(b, {1, 2}, -1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(thermal_rate(b, {1, 2}, +1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(thermal_rate(b, {1, 2}, 0.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(thermal_rate(bath_t0(), {1, 2}, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(thermal_rate(bath_t0(), {1, 2}, 1.0) == 0.0);

  BathSpec beta;  // finite temperature, no reference: degenerate channel is singular
  beta.inv_temperature = 2.0;
  CHECK_THROWS_AS(thermal_rate(beta, {1, 2}, 0.0), std::invalid_argument);
  beta.reference_frequency = 1.0;
  CHECK(thermal_rate(beta, {1, 2}, 0.0) ==
        doctest::Approx(1.0 / std::expm1(2.0) + 0.5).epsilon(1e-14));
}

TEST_CASE("per-pair coupling overrides are direction-free") {
  BathSpec b = bath_t0();
  b.gamma_se = 1.0;
  b.gamma_se_edges[{2, 5}] = 0.25;
  CHECK(gamma_se_for(b, {2, 5}) == 0.25);
  CHECK(gamma_se_for(b, {5, 2}) == 0.25);
  CHECK(gamma_se_for(b, {1, 2}) == 1.0);
  CHECK(thermal_rate(b, {5, 2}, -1.0) == doctest::Approx(0.25));
}

TEST_CASE("coin resolution fills reverse directions with adjoints") {
  MicroscopicModel m = two_level_pair(1.0, bath_t0());
  const auto coins = resolved_coins(m);
  REQUIRE(coins.size() == 2);
  CHECK(max_abs(coins.at({1, 2}) - sigma_minus()) == 0.0);
  CHECK(max_abs(coins.at({2, 1}) - sigma_plus()) == 0.0);

  // both directions, consistent
  m.coins[{2, 1}] = sigma_plus();
  CHECK_NOTHROW(resolved_coins(m));
  // both directions, inconsistent
  m.coins[{2, 1}] = sigma_minus();
  CHECK_THROWS_AS(resolved_coins(m), std::invalid_argument);

  MicroscopicModel missing = two_level_pair(1.0, bath_t0());
  missing.coins.clear();
  CHECK_THROWS_AS(resolved_coins(missing), std::invalid_argument);

  MicroscopicModel off_graph = two_level_pair(1.0, bath_t0());
  off_graph.coins[{1, 1}] = sigma_minus();
  CHECK_THROWS_AS(resolved_coins(off_graph), std::invalid_argument);
}

TEST_CASE("model validation rejects non-hermitian hamiltonians") {
  MicroscopicModel m = two_level_pair(1.0, bath_t0());
  m.node_hamiltonians[0] = sigma_plus();
  CHECK_THROWS_AS(resolved_coins(m), std::invalid_argument);
  MicroscopicModel m2 = two_level_pair(1.0, bath_t0());
  m2.residual_hamiltonians.assign(2, sigma_minus());
  CHECK_THROWS_AS(eigen_decompose_coins(m2), std::invalid_argument);
}

TEST_CASE("lowering coin splits into one emission and one absorption operator") {
  const MicroscopicModel m = two_level_pair(1.0, bath_n(1.0, 1.0));
  const EigenOperatorSet set = eigen_decompose_coins(m);
  REQUIRE(set.by_edge.size() == 2);
  const auto& fwd = set.by_edge.at({1, 2});
  REQUIRE(fwd.size() == 1);
  CHECK(fwd[0].omega == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(max_abs(fwd[0].op - sigma_minus()) < 1e-12);
  const auto& rev = set.by_edge.at({2, 1});
  REQUIRE(rev.size() == 1);
  CHECK(rev[0].omega == doctest::Approx(+1.0).epsilon(1e-12));
  CHECK(max_abs(rev[0].op - sigma_plus()) < 1e-12);
}

TEST_CASE("three-level ladder with a full coin yields all seven frequencies") {
  MicroscopicModel m;
  m.graph = make_chain(2);
  Matrix h = Matrix::Zero(3, 3);
  h(1, 1) = 1.0;
  h(2, 2) = 3.0;
  m.node_hamiltonians.assign(2, h);
  m.coins[{1, 2}] = Matrix::Ones(3, 3);
  m.bath = bath_t0();
  const EigenOperatorSet set = eigen_decompose_coins(m);
  const auto& ops = set.by_edge.at({1, 2});
  REQUIRE(ops.size() == 7);
  const double expect[] = {-3, -2, -1, 0, 1, 2, 3};
  Matrix sum = Matrix::Zero(3, 3);
  for (size_t k = 0; k < ops.size(); ++k) {
    CHECK(ops[k].omega == doctest::Approx(expect[k]).epsilon(1e-10));
    sum += ops[k].op;
  }
  // zero-frequency part of an all-ones coin on a diagonal spectrum: identity
  CHECK(max_abs(ops[3].op - identity(3)) < 1e-10);
  // the split is exact: parts sum back to the coin
  CHECK(max_abs(sum - Matrix::Ones(3, 3)) < 1e-10);
}

TEST_CASE("near-degenerate frequencies merge and snap to zero") {
  MicroscopicModel m;
  m.graph = make_chain(2);
  Matrix h = Matrix::Zero(2, 2);
  h(1, 1) = 1e-12;  // splitting far below the cluster tolerance
  m.node_hamiltonians.assign(2, h);
  m.coins[{1, 2}] = sigma_minus() + sigma_plus();
  m.bath = bath_t0();
  const EigenOperatorSet eset = eigen_decompose_coins(m);
  const auto& ops = eset.by_edge.at({1, 2});
  REQUIRE(ops.size() == 1);
  CHECK(ops[0].omega == 0.0);  // snapped exactly
  CHECK(max_abs(ops[0].op - sigma_x()) < 1e-10);
}

TEST_CASE("generator drops zero-rate channels and accumulates loss") {
  const MicroscopicModel cold = two_level_pair(1.0, bath_t0());
  const GeneratorSpec g0 = build_generator(cold);
  // absorption channel (2 -> 1 carries +omega0) has rate 0 at T = 0
  REQUIRE(g0.channels.size() == 1);
  CHECK(g0.channels[0].source == 1);
  CHECK(g0.channels[0].target == 2);
  CHECK(g0.channels[0].rate == doctest::Approx(1.0));
  CHECK(g0.channels[0].omega == doctest::Approx(-1.0));
  CHECK(max_abs(g0.loss[0] - sigma_plus() * sigma_minus()) < 1e-12);
  CHECK(max_abs(g0.loss[1]) < 1e-15);
  // no residual Hamiltonians given: zero blocks
  CHECK(max_abs(g0.hamiltonians[0]) == 0.0);

  const MicroscopicModel warm = two_level_pair(1.0, bath_n(1.0, 1.0));
  const GeneratorSpec g1 = build_generator(warm);
  REQUIRE(g1.channels.size() == 2);
  // graph.edges order: (1,2) then (2,1)
  CHECK(g1.channels[0].rate == doctest::Approx(2.0));  // emission, n + 1
  CHECK(g1.channels[1].rate == doctest::Approx(1.0));  // absorption, n
  CHECK(max_abs(g1.loss[0] - 2.0 * sigma_plus() * sigma_minus()) < 1e-12);
  CHECK(max_abs(g1.loss[1] - 1.0 * sigma_minus() * sigma_plus()) < 1e-12);
}

TEST_CASE("frequency labels are stable against eigensolver noise") {
  CHECK(frequency_label(-1.0) == "w=-1");
  CHECK(frequency_label(1.0 + 3e-13) == "w=1");
  CHECK(frequency_label(0.0) == "w=0");
  CHECK(frequency_label(-0.25) == "w=-0.25");
}

TEST_CASE("first-order table carries sqrt(delta rate) ops and damped loops") {
  const double delta = 0.01;
  const MicroscopicModel warm = two_level_pair(1.0, bath_n(1.0, 1.0));
  const GeneratorSpec g = build_generator(warm);
  const TransitionTable t = discretize(g, delta);
  CHECK(t.delta == delta);
  CHECK(t.max_rate == doctest::Approx(2.0));
  const int e12 = edge_index(t.graph, 1, 2);
  REQUIRE(t.edge_ops[e12].size() == 1);
  CHECK(t.edge_ops[e12][0].label == "w=-1");
  CHECK(max_abs(t.edge_ops[e12][0].op - std::sqrt(delta * 2.0) * sigma_minus()) < 1e-15);
  Matrix expect_loop = identity(2);
  expect_loop(1, 1) -= 0.5 * delta * 2.0;
  CHECK(max_abs(t.loop_ops[0] - expect_loop) < 1e-15);
  CHECK(validate_table(t).empty());
}

TEST_CASE("exactly normalized table hits the identity to machine precision") {
  const MicroscopicModel warm = two_level_pair(1.0, bath_n(1.0, 1.0));
  const GeneratorSpec g = build_generator(warm);
  const TransitionTable t = discretize_exact(g, 0.05);
  for (double d : normalization_defects(t)) CHECK(d < 1e-14);
  // matches the first-order loop to O(delta^2)
  const TransitionTable t1 = discretize(g, 0.05);
  CHECK(max_abs(t.loop_ops[0] - t1.loop_ops[0]) < 10 * 0.05 * 0.05);
}

TEST_CASE("discretizers reject steps past the loss scale") {
  const MicroscopicModel warm = two_level_pair(1.0, bath_n(1.0, 1.0));
  const GeneratorSpec g = build_generator(warm);  // max loss rate 2
  CHECK_THROWS_AS(discretize(g, 0.6), std::runtime_error);
  CHECK_THROWS_AS(discretize_exact(g, 0.6), std::runtime_error);
  CHECK_NOTHROW(discretize(g, 0.4));
  CHECK_THROWS_AS(discretize(g, 0.0), std::invalid_argument);
}

}  // TEST_SUITE
