#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "brute_force.hpp"
#include "treecut/errors.hpp"
#include "treecut/oracle.hpp"
#include "treecut/random_graphs.hpp"

#include <iostream>

using namespace treecut;

namespace {

OracleParams params_for(int n, const Rational& phi) {
  OracleParams p;
  p.phi = phi;
  p.logn = log2_approx(n);
  return p;
}

void require_clean(const std::vector<std::string>& msgs) {
  for (const auto& m : msgs) MESSAGE(m);
  CHECK(msgs.empty());
}

}  // namespace

TEST_CASE("sparsest cut examples") {
  auto d = sparsest_cut(dumbbell(4), unit_measure(8));
  CHECK(d.value == rat(1, 4));
  CHECK(cut_capacity(dumbbell(4), d.side) == 1);
  auto k5 = sparsest_cut(complete_graph(5), unit_measure(5));
  CHECK(k5.value == 3);
  CHECK((d.side.size() == 4));
  CHECK((k5.side.size() == 2 || k5.side.size() == 3));
  auto c4 = sparsest_cut(cycle_graph(4), indicator(4, {0, 2}));
  CHECK(c4.value == 2);
  CHECK_THROWS_AS(sparsest_cut(cycle_graph(4), indicator(4, {1})), ContractError);
}

TEST_CASE("spectral sweep above the enumeration range") {
  auto d = sparsest_cut(dumbbell(6), unit_measure(12), 2);
  CHECK_FALSE(d.exact);
  CHECK(d.value == rat(1, 6));
  // The sweep never beats the optimum.
  std::mt19937_64 rng(3);
  for (int iter = 0; iter < 20; ++iter) {
    int n = 4 + static_cast<int>(rng() % 6);
    Graph g = random_graph(n, 0.5, 2, true, rng);
    Measure mu = brute::random_measure(n, rng);
    auto exact = brute::expansion(g, mu);
    auto approx = try_sparsest_cut(g, mu, 1);
    if (!exact) continue;
    REQUIRE(approx.has_value());
    CHECK(approx->value >= *exact);
    CHECK(*cut_expansion(g, approx->side, mu) == approx->value);
  }
}

TEST_CASE("cut_or_expander examples") {
  auto k5 = cut_or_expander(complete_graph(5), unit_measure(5), params_for(5, 1));
  CHECK(k5.tag == OracleCase::Expander);
  require_clean(check_outcome(complete_graph(5), unit_measure(5), k5));

  Graph d = dumbbell(4);
  auto o = cut_or_expander(d, unit_measure(8), params_for(8, 1));
  CHECK(o.tag != OracleCase::Expander);
  REQUIRE_FALSE(o.peels.empty());
  CHECK(cut_capacity(d, o.peels[0].peeled) == 1);
  CHECK(*o.peels[0].sparsity == rat(1, 4));
  require_clean(check_outcome(d, unit_measure(8), o));

  auto one = cut_or_expander(d, indicator(8, {3}), params_for(8, 1));
  CHECK(one.tag == OracleCase::Expander);
  CHECK_FALSE(one.certificate.has_value());
  CHECK_THROWS_AS(cut_or_expander(d, unit_measure(8), params_for(8, 0)), ArgumentError);
}

TEST_CASE("refined examples") {
  auto k5 = refined_cut_or_expander(complete_graph(5), unit_measure(5), unit_measure(5), params_for(5, 1));
  CHECK(k5.tag == RefinedCase::C1);

  // Two K4s and a bridge; four pendant "boundary" vertices on the first K4.
  Graph g = dumbbell(4);
  VertexSet pendants;
  for (int v : {0, 1, 2, 0}) {
    int x = g.add_vertex();
    g.add_edge(v, x, 1);
    pendants.push_back(x);
  }
  Measure mu = indicator(g.vertex_count(), pendants);
  Measure nu = indicator(g.vertex_count(), all_vertices(8));
  for (Rational phi : {rat(1, 2), rat(1, 8), rat(1, 40)}) {
    auto r = refined_cut_or_expander(g, mu, nu, params_for(12, phi));
    require_clean(check_refined(g, mu, nu, r));
    if (r.tag != RefinedCase::C1) {
      CHECK(r.flow.feasible);
      CHECK(2 * measure_of(nu, r.left()) <= measure_total(nu) + 2 * measure_of(nu, r.a2));
    }
  }
}

TEST_CASE("oracle outcomes pass their checkers on random inputs") {
  std::mt19937_64 rng(99);
  std::map<std::string, int> seen;
  int trims = 0;
  for (int iter = 0; iter < 600; ++iter) {
    int n = 3 + static_cast<int>(rng() % 9);
    Graph g = random_graph(n, 0.2 + 0.1 * static_cast<double>(rng() % 6), 2, rng() % 5 != 0, rng);
    Measure mu = brute::random_measure(n, rng, 3, 0.4);
    for (auto& x : mu) x *= static_cast<long>(1 + rng() % 16);
    Measure nu = brute::random_measure(n, rng, 4, 0.3);
    if (measure_total(nu) == 0) nu = unit_measure(n);
    OracleParams p = params_for(n, rat(static_cast<long>(1 + rng() % 3), static_cast<long>(1 + rng() % 60)));
    p.promote_small = rng() % 2;
    auto o = cut_or_expander(g, mu, p);
    require_clean(check_outcome(g, mu, o));
    trims += o.trims;
    auto r = refined_cut_or_expander(g, mu, nu, p);
    require_clean(check_refined(g, mu, nu, r));
    ++seen[case_name(r.tag)];
  }
  for (const auto& [k, v] : seen) std::cout << "case " << k << ": " << v << "\n";
  std::cout << "trims: " << trims << "\n";
  CHECK(seen.size() >= 4);
}

TEST_CASE("oracle on subdivision graphs with split-node measures") {
  std::mt19937_64 rng(123);
  for (int iter = 0; iter < 60; ++iter) {
    int n = 3 + static_cast<int>(rng() % 7);
    Graph base = random_graph(n, 0.5, 2, true, rng);
    auto sd = subdivide(base);
    Measure mu = zero_measure(sd.graph.vertex_count());
    for (int e = 0; e < base.edge_count(); ++e)
      if (rng() % 2) mu[sd.split_of(e)] = base.edge(e).cap;
    Measure nu = indicator(sd.graph.vertex_count(), all_vertices(n));
    OracleParams p = params_for(n, rat(3, 10) / log2_approx(n));
    auto r = refined_cut_or_expander(sd.graph, mu, nu, p);
    require_clean(check_refined(sd.graph, mu, nu, r));
  }
}

TEST_CASE("outcome json") {
  Graph d = dumbbell(3);
  auto o = cut_or_expander(d, unit_measure(6), params_for(6, 1));
  auto j = outcome_json(d, o);
  CHECK(j["case"] == case_name(o.tag));
  CHECK(j["peels"].size() == o.peels.size());
}
