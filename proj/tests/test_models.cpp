#include "oqw/models.hpp"

#include "oqw/observables.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

using namespace oqw;

namespace {

// Label -> operator map for one edge list, so comparisons are order-free.
std::map<std::string, Matrix> by_label(const std::vector<LabeledOp>& ops) {
  std::map<std::string, Matrix> m;
  for (const LabeledOp& lo : ops) {
    REQUIRE(m.find(lo.label) == m.end());  // labels unique per edge
    m.emplace(lo.label, lo.op);
  }
  return m;
}

// Max operator mismatch between two tables, matching edge entries by label
// and treating an absent list as all-zero.
double table_gap(const TransitionTable& a, const TransitionTable& b) {
  REQUIRE(a.graph.edges == b.graph.edges);
  REQUIRE(a.dim == b.dim);
  double gap = 0.0;
  for (std::size_t e = 0; e < a.graph.edges.size(); ++e) {
    const auto ma = by_label(a.edge_ops[e]), mb = by_label(b.edge_ops[e]);
    for (const auto& [label, op] : ma) {
      const auto it = mb.find(label);
      gap = std::max(gap, it == mb.end() ? max_abs(op) : max_abs(op - it->second));
    }
    for (const auto& [label, op] : mb)
      if (ma.find(label) == ma.end()) gap = std::max(gap, max_abs(op));
  }
  for (int j = 0; j < a.graph.node_count; ++j)
    gap = std::max(gap, max_abs(a.loop_ops[j] - b.loop_ops[j]));
  return gap;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("ring: reduction pipeline reproduces the closed-form table") {
  for (double n_mean : {0.0, 1.0, 5.0}) {
    CircleParams p;
    p.nodes = 7;
    p.n_mean = n_mean;
    p.delta = 0.02;
    for (TableNormalization norm : {TableNormalization::truncated, TableNormalization::exact}) {
      const BuiltModel bm = build_circle_model(p, norm);
      const GeneratorSpec g = build_generator(bm.model);
      const TransitionTable piped =
          norm == TableNormalization::truncated ? discretize(g, p.delta)
                                                : discretize_exact(g, p.delta);
      CHECK(table_gap(bm.table, piped) < 1e-12);
    }
  }
}

TEST_CASE("chain: reduction pipeline reproduces the closed-form table") {
  for (double n_mean : {0.0, 1.0, 10.0}) {
    ChainParams p;
    p.nodes = 6;
    p.n_mean = n_mean;
    p.delta = 0.002;
    for (TableNormalization norm : {TableNormalization::truncated, TableNormalization::exact}) {
      const BuiltModel bm = build_chain_model(p, norm);
      const GeneratorSpec g = build_generator(bm.model);
      const TransitionTable piped =
          norm == TableNormalization::truncated ? discretize(g, p.delta)
                                                : discretize_exact(g, p.delta);
      CHECK(table_gap(bm.table, piped) < 1e-12);
    }
  }
}

TEST_CASE("ring table: one step from an excited block") {
  CircleParams p;
  p.nodes = 11;
  p.n_mean = 1.0;
  p.delta = 0.01;
  const BuiltModel bm = build_circle_model(p, TableNormalization::truncated);
  Matrix excited = Matrix::Zero(2, 2);
  excited(1, 1) = 1.0;
  const WalkState s1 = step(bm.table, make_point_state(bm.table.graph, 6, excited));
  // emission carries delta gamma (n+1) of weight one node forward, de-excited
  CHECK(block(s1, 7).trace().real() == doctest::Approx(0.02).epsilon(1e-13));
  CHECK(std::abs(block(s1, 7)(1, 1)) < 1e-15);
  // an excited block cannot absorb: nothing moves backward
  CHECK(max_abs(block(s1, 5)) < 1e-15);
  // first-order table: trace deviates only at O(delta^2)
  CHECK(std::abs(total_trace(s1) - 1.0) < 1e-3);

  // from a mixed block both directions populate in the thermal ratio
  const WalkState s2 =
      step(bm.table, make_point_state(bm.table.graph, 6, 0.5 * identity(2)));
  CHECK(block(s2, 7).trace().real() == doctest::Approx(0.01).epsilon(1e-13));
  CHECK(block(s2, 5).trace().real() == doctest::Approx(0.005).epsilon(1e-13));
}

TEST_CASE("ring table: exact normalization conserves trace over long runs") {
  CircleParams p;
  p.nodes = 11;
  p.n_mean = 1.0;
  p.delta = 0.05;
  const BuiltModel bm = build_circle_model(p, TableNormalization::exact);
  for (double d : normalization_defects(bm.table)) CHECK(d < 1e-14);
  WalkState s = make_point_state(bm.table.graph, 6, 0.5 * identity(2));
  run_observe(bm.table, s, 2000, 2000, [&](long k, const WalkState& st) {
    if (k == 2000) CHECK(std::abs(total_trace(st) - 1.0) < 1e-12);
  });
}

TEST_CASE("ring table: truncated defect shrinks by 4 when delta halves") {
  CircleParams p;
  p.nodes = 5;
  p.n_mean = 1.0;
  const auto worst = [&](double delta) {
    p.delta = delta;
    const BuiltModel bm = build_circle_model(p, TableNormalization::truncated);
    double w = 0.0;
    for (double d : normalization_defects(bm.table)) w = std::max(w, d);
    return w;
  };
  const double ratio = worst(0.05) / worst(0.025);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("chain table: boundary loops differ from the interior") {
  ChainParams p;
  p.nodes = 5;
  p.n_mean = 1.0;
  p.delta = 0.005;
  const BuiltModel bm = build_chain_model(p, TableNormalization::exact);
  const double g = p.gamma_se, n = p.n_mean;
  // interior: both exits open, rate gamma (2n+1); walls lose only one way
  CHECK(bm.table.loop_ops[1](0, 0).real() ==
        doctest::Approx(std::sqrt(1.0 - p.delta * g * (2 * n + 1))).epsilon(1e-15));
  CHECK(bm.table.loop_ops[0](0, 0).real() ==
        doctest::Approx(std::sqrt(1.0 - p.delta * g * n)).epsilon(1e-15));
  CHECK(bm.table.loop_ops[4](0, 0).real() ==
        doctest::Approx(std::sqrt(1.0 - p.delta * g * (n + 1))).epsilon(1e-15));
  // emission edges point down the ladder and carry the w = -delta0 tag
  const int e21 = edge_index(bm.table.graph, 2, 1);
  REQUIRE(bm.table.edge_ops[e21].size() == 1);
  CHECK(bm.table.edge_ops[e21][0].label == frequency_label(-p.delta0));
  const int e12 = edge_index(bm.table.graph, 1, 2);
  REQUIRE(bm.table.edge_ops[e12].size() == 1);
  CHECK(bm.table.edge_ops[e12][0].label == frequency_label(p.delta0));
}

TEST_CASE("chain table: diagonal dynamics is the classical two-rate recursion") {
  ChainParams p;
  p.nodes = 21;
  p.n_mean = 1.0;
  p.delta = 0.005;
  const BuiltModel bm = build_chain_model(p, TableNormalization::exact);
  const ClassicalSeries cs =
      chain_diagonal_recursion(p.nodes, p.gamma_se, p.n_mean, p.delta, 11, 200, 50);
  std::size_t row = 0;
  run_observe(bm.table, make_point_state(bm.table.graph, 11, 0.5 * identity(2)), 200, 50,
              [&](long k, const WalkState& st) {
                REQUIRE(cs.steps[row] == k);
                for (int node = 1; node <= p.nodes; ++node)
                  CHECK(std::abs(block(st, node).trace().real() -
                                 cs.occupation[row][node - 1]) < 1e-12);
                ++row;
              });
  CHECK(row == cs.occupation.size());
}

TEST_CASE("chain table: coherence contracts by 1 - 2 gamma c delta per step") {
  ChainParams p;
  p.nodes = 21;
  p.n_mean = 1.0;
  p.delta = 0.005;
  const double factor_exact = 1.0 - 2.0 * p.gamma_se * (2 * p.n_mean + 1) * p.delta;
  const BuiltModel ex = build_chain_model(p, TableNormalization::exact);
  const WalkState s0 =
      make_point_state(ex.table.graph, 11, initial_state_named("minus", 2));
  WalkState s = s0;
  for (int k = 0; k < 10; ++k) s = step(ex.table, s);
  CHECK(moments_of_state(s).coherence_x ==
        doctest::Approx(-std::pow(factor_exact, 10)).epsilon(1e-12));

  // the first-order table contracts slightly slower, by gamma^2 c^2 delta^2/4
  const double gcd = p.gamma_se * (2 * p.n_mean + 1) * p.delta;
  const double factor_trunc = (1.0 - 0.5 * gcd) * (1.0 - 0.5 * gcd) - gcd;
  const BuiltModel tr = build_chain_model(p, TableNormalization::truncated);
  WalkState st = make_point_state(tr.table.graph, 11, initial_state_named("minus", 2));
  for (int k = 0; k < 10; ++k) st = step(tr.table, st);
  const double coh = moments_of_state(st).coherence_x * total_trace(st);
  CHECK(coh == doctest::Approx(-std::pow(factor_trunc, 10)).epsilon(1e-12));
}

TEST_CASE("named initial blocks") {
  const Matrix mm = initial_state_named("maximally-mixed", 3);
  CHECK(mm.trace().real() == doctest::Approx(1.0));
  CHECK(max_abs(mm - identity(3) / 3.0) < 1e-15);
  CHECK(initial_state_named("ground", 2)(0, 0).real() == 1.0);
  CHECK(initial_state_named("excited", 2)(1, 1).real() == 1.0);
  const Matrix minus = initial_state_named("minus", 2);
  CHECK(minus.trace().real() == doctest::Approx(1.0));
  CHECK((minus * sigma_x()).trace().real() == doctest::Approx(-1.0));
  CHECK((initial_state_named("plus", 2) * sigma_x()).trace().real() == doctest::Approx(1.0));
  CHECK_THROWS_AS(initial_state_named("sideways", 2), std::invalid_argument);
  CHECK_THROWS_AS(initial_state_named("minus", 3), std::invalid_argument);
  CHECK_THROWS_AS(initial_state_named("ground", 1), std::invalid_argument);
}

TEST_CASE("classical recursion conserves probability and drifts left when cold") {
  const ClassicalSeries cs = chain_diagonal_recursion(9, 1.0, 0.0, 0.1, 5, 30, 10);
  for (const auto& row : cs.occupation) {
    double sum = 0.0;
    for (double x : row) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
  }
  // T = 0: no rightward moves at all
  for (const auto& row : cs.occupation)
    for (int i = 5; i < 9; ++i) CHECK(row[i] == 0.0);
  // one step from the start: 1 - pd stays, pd moved left
  const ClassicalSeries one = chain_diagonal_recursion(9, 1.0, 0.0, 0.1, 5, 1, 1);
  CHECK(one.occupation[1][4] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(one.occupation[1][3] == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("model builders validate their parameters") {
  CircleParams c;
  c.nodes = 2;
  CHECK_THROWS_AS(build_circle_model(c, TableNormalization::exact), std::invalid_argument);
  c = CircleParams{};
  c.delta = 0.9;  // delta * gamma * (n + 1) = 1.8
  CHECK_THROWS_AS(build_circle_model(c, TableNormalization::exact), std::invalid_argument);
  c = CircleParams{};
  c.n_mean = -1.0;
  CHECK_THROWS_AS(build_circle_model(c, TableNormalization::truncated), std::invalid_argument);

  ChainParams h;
  h.nodes = 1;
  CHECK_THROWS_AS(build_chain_model(h, TableNormalization::exact), std::invalid_argument);
  h = ChainParams{};
  h.delta = 0.5;  // delta * gamma * (2n + 1) = 1.5
  CHECK_THROWS_AS(build_chain_model(h, TableNormalization::exact), std::invalid_argument);
  h = ChainParams{};
  h.gamma_se = 0.0;
  CHECK_THROWS_AS(build_chain_model(h, TableNormalization::truncated), std::invalid_argument);
}

}  // TEST_SUITE
