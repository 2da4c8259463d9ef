#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "brute_force.hpp"
#include "treecut/demand_state.hpp"
#include "treecut/errors.hpp"
#include "treecut/expansion.hpp"
#include "treecut/random_graphs.hpp"

#include <sstream>

using namespace treecut;

namespace {

// sum_k |sum_{u in mask} P(u,k)| by a double loop over listed commodities.
Rational brute_dem(const DemandState& p, uint64_t mask) {
  Rational t = 0;
  for (int k : p.commodities()) {
    Rational s = 0;
    for (int u : p.vertices())
      if ((mask >> u) & 1) s += p.get(u, k);
    t += abs(s);
  }
  return t;
}

DemandMatrix random_matrix(int n, std::mt19937_64& rng, int entries) {
  DemandMatrix q;
  for (int i = 0; i < entries; ++i) {
    int u = static_cast<int>(rng() % n), v = static_cast<int>(rng() % n);
    if (u != v) q.add(u, v, rat(static_cast<long>(rng() % 5 + 1), static_cast<long>(rng() % 3 + 1)));
  }
  return q;
}

// Only sends from vertices with positive load.
DemandMatrix random_matrix_for(const DemandState& p, int n, std::mt19937_64& rng, int entries) {
  DemandMatrix q;
  auto vs = p.vertices();
  if (vs.empty()) return q;
  for (int i = 0; i < entries; ++i) {
    int u = vs[rng() % vs.size()], v = static_cast<int>(rng() % n);
    q.add(u, v, rat(static_cast<long>(rng() % 7 + 1), static_cast<long>(rng() % 4 + 1)));
  }
  return q;
}

std::vector<char> mask_vec(uint64_t mask, int n) {
  std::vector<char> s(n);
  for (int v = 0; v < n; ++v) s[v] = (mask >> v) & 1;
  return s;
}

}  // namespace

TEST_CASE("from_matrix examples") {
  DemandMatrix q;
  q.add(0, 1, 3);
  auto p = from_matrix(q);
  CHECK(p.get(0, 0) == 3);
  CHECK(p.get(1, 0) == -3);
  CHECK(p.valid());
  CHECK(from_matrix(DemandMatrix{}).empty());

  DemandMatrix a;
  a.add(0, 1, rat(1, 2));
  a.add(1, 0, rat(1, 2));
  CHECK(dem_across(from_matrix(a), VertexSet{0}) == 1);
}

TEST_CASE("dem_across examples") {
  DemandState p;
  p.add(0, 7, 3);
  p.add(1, 7, -3);
  CHECK(dem_across(p, VertexSet{0}) == 3);
  CHECK(dem_across(p, VertexSet{1}) == 3);
  CHECK(dem_across(p, VertexSet{0, 1}) == 0);
  DemandState bad;
  bad.add(0, 0, 1);
  CHECK_THROWS_AS(dem_across(bad, VertexSet{0}), ContractError);
}

TEST_CASE("dem_across and from_matrix round trip against enumeration") {
  std::mt19937_64 rng(12);
  for (int iter = 0; iter < 60; ++iter) {
    int n = 2 + static_cast<int>(rng() % 7);
    auto q = random_matrix(n, rng, 2 * n);
    auto p = from_matrix(q);
    CHECK(p.valid());
    for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
      auto side = mask_vec(mask, n);
      CHECK(dem_across(p, side) == brute_dem(p, mask));
      // dem_Q by definition.
      Rational dq = 0;
      for (const auto& [k, x] : q.entries)
        if (((mask >> k.first) & 1) != ((mask >> k.second) & 1)) dq += x;
      CHECK(dem_across(p, side) == dq);
      // symmetric in the two sides
      CHECK(dem_across(p, side) == dem_across(p, mask_vec(~mask, n)));
    }
  }
}

TEST_CASE("respects_exact examples") {
  Graph g = dumbbell(3);
  CHECK_FALSE(respects_exact(g, DemandState{}).ratio.has_value());
  DemandState p;
  p.add(0, 0, 1);
  p.add(5, 0, -1);
  auto r = respects_exact(g, p);
  CHECK(*r.ratio == 1);
  CHECK(cut_capacity(g, r.argmin) == 1);
  CHECK_THROWS_AS(respects_exact(complete_graph(21), DemandState{}), SizeError);
}

TEST_CASE("all-to-all state matches the expansion of the set") {
  std::mt19937_64 rng(31);
  for (int iter = 0; iter < 40; ++iter) {
    int n = 3 + static_cast<int>(rng() % 6);
    Graph g = random_graph(n, 0.6, 2, true, rng);
    VertexSet a;
    for (int v = 0; v < n; ++v)
      if (rng() % 4) a.push_back(v);
    if (a.size() < 2) continue;
    // D_A(u, v) = 1/|A| for ordered pairs in A.
    DemandMatrix q;
    for (int u : a)
      for (int v : a)
        if (u != v) q.add(u, v, rat(1, static_cast<long>(a.size())));
    auto r = respects_exact(g, from_matrix(q));
    auto phi = graph_expansion_exact(g, indicator(n, a));
    REQUIRE(phi.has_value());
    CHECK(*phi <= 2 * *r.ratio);
    CHECK(*r.ratio <= *phi);
    CHECK(*r.ratio == *all_to_all_respect_exact(g, indicator(n, a)).value);
  }
}

TEST_CASE("update on the worked example") {
  DemandState p;
  p.add(0, 0, 20);
  p.add(0, 1, -70);
  p.add(0, 2, 10);
  DemandMatrix q;
  q.add(0, 1, 30);
  auto r = update(p, q);
  CHECK(r.get(0, 0) == 14);
  CHECK(r.get(0, 1) == -49);
  CHECK(r.get(0, 2) == 7);
  CHECK(r.get(1, 0) == 6);
  CHECK(r.get(1, 1) == -21);
  CHECK(r.get(1, 2) == 3);
  CHECK(update(p, DemandMatrix{}) == p);
  DemandMatrix from_empty;
  from_empty.add(5, 0, 1);
  CHECK_THROWS_AS(update(p, from_empty), ContractError);
}

TEST_CASE("scaled all-to-all update equalizes the set") {
  std::mt19937_64 rng(2);
  for (int iter = 0; iter < 30; ++iter) {
    int n = 3 + static_cast<int>(rng() % 5);
    auto p = random_state(n, rng, 2 * n);
    VertexSet a;
    for (int v = 0; v < n; ++v)
      if (rng() % 3) a.push_back(v);
    if (a.empty()) continue;
    DemandMatrix q;
    for (int u : a)
      for (int v : a) q.add(u, v, p.load(u) / static_cast<long>(a.size()));
    auto r = update(p, q);
    auto avg = p.commodity_sums(a);
    for (auto& [k, x] : avg) x /= static_cast<long>(a.size());
    for (int v : a) {
      const auto* row = r.row(v);
      CHECK((row ? *row : DemandState::Row{}) == avg);
    }
    for (int v = 0; v < n; ++v)
      if (!contains(a, v)) CHECK(r.load(v) == p.load(v));
  }
}

TEST_CASE("update keeps the difference valid and bounded by the matrix") {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 200; ++iter) {
    int n = 2 + static_cast<int>(rng() % 7);
    auto p = random_state(n, rng, 2 * n);
    auto q = random_matrix_for(p, n, rng, 1 + static_cast<int>(rng() % 6));
    auto r = update(p, q);
    auto d = p - r;
    CHECK(d.valid());
    // Expanded form: (P - P^Q)(u,k) = sum_v P(u,k)/|P(u)| Q(u,v) - P(v,k)/|P(v)| Q(v,u).
    DemandState expanded;
    for (const auto& [key, x] : q.entries) {
      auto [u, v] = key;
      for (const auto& [k, y] : *p.row(u)) {
        expanded.add(u, k, y / p.load(u) * x);
        expanded.add(v, k, -y / p.load(u) * x);
      }
    }
    CHECK(expanded == d);
    for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
      auto side = mask_vec(mask, n);
      CHECK(dem_across(d, side) <= dem_across(q, side));
    }
  }
}

TEST_CASE("demand of a sum is subadditive and respect composes") {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 60; ++iter) {
    int n = 2 + static_cast<int>(rng() % 6);
    Graph g = random_graph(n, 0.5, 3, true, rng);
    auto p1 = random_state(n, rng, n);
    auto p2 = random_state(n, rng, n);
    for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
      auto side = mask_vec(mask, n);
      CHECK(dem_across(p1 + p2, side) <= dem_across(p1, side) + dem_across(p2, side));
    }
    auto a1 = respects_exact(g, p1).ratio, a2 = respects_exact(g, p2).ratio;
    auto a12 = respects_exact(g, p1 + p2).ratio;
    if (a1 && a2 && a12) CHECK(*a12 >= 1 / (1 / *a1 + 1 / *a2));
  }
}

TEST_CASE("leaf_init") {
  Graph p3 = path_graph(3);
  DemandState p;
  p.add(1, 0, 1);
  p.add(1, 1, -1);
  p.add(0, 1, 1);
  p.add(2, 0, -1);
  auto leaves = leaf_init(p, p3);
  CHECK(leaves[1].get(3 + 0, 0) == rat(1, 2));
  CHECK(leaves[1].get(3 + 1, 1) == rat(-1, 2));
  CHECK(leaves[1].load(3) == 1);
  CHECK(leaf_init(DemandState{}, p3)[0].empty());

  DemandState heavy;
  heavy.add(0, 0, 2);
  heavy.add(1, 0, -2);
  CHECK_THROWS_AS(leaf_init(heavy, p3), ContractError);

  ClusterView c1(p3, {1});
  CHECK(invariant_check(leaves[1], c1, p, 1).ok);
  DemandState interior = leaves[1];
  interior.add(1, 0, 1);
  CHECK(invariant_check(interior, c1, p, 1).clause == 1);
  DemandState heavy_node = leaves[1];
  heavy_node.add(3, 0, rat(1, 100));
  heavy_node.add(4, 0, rat(-1, 100));
  auto res = invariant_check(heavy_node, c1, p, 1);
  CHECK(res.clause == 3);
}

TEST_CASE("leaf states preserve every cut up to its capacity") {
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 40; ++iter) {
    int n = 2 + static_cast<int>(rng() % 7);
    Graph g = random_graph(n, 0.5, 2, rng() % 2, rng);
    auto p = random_state(n, rng, 2 * n);
    // Scale so that every degree cut is respected.
    Rational worst = 0;
    for (int v = 0; v < n; ++v)
      if (p.load(v) > 0) {
        if (g.degree(v) == 0) worst = -1;
        else if (worst >= 0 && p.load(v) / g.degree(v) > worst) worst = p.load(v) / g.degree(v);
      }
    if (worst < 0) continue;
    if (worst > 1) p = p.scaled(1 / worst);
    auto leaves = leaf_init(p, g);
    DemandState q0;
    for (const auto& [v, s] : leaves) q0 = q0 + s;
    int total = n + g.edge_count();
    for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
      std::vector<char> lifted(total, 0);
      for (int v = 0; v < n; ++v) lifted[v] = (mask >> v) & 1;
      for (int e = 0; e < g.edge_count(); ++e) lifted[n + e] = lifted[g.edge(e).u] || lifted[g.edge(e).v];
      CHECK(dem_across(p, mask_vec(mask, n)) <= dem_across(q0, lifted) + cut_capacity(g, mask_vec(mask, n)));
    }
    for (int v = 0; v < n; ++v) CHECK(invariant_check(leaves[v], ClusterView(g, {v}), p, 1).ok);
  }
}

TEST_CASE("state serialization round trip") {
  std::mt19937_64 rng(1);
  auto p = random_state(6, rng, 10);
  std::stringstream ss;
  write_state(ss, p);
  CHECK(read_state(ss) == p);
  std::istringstream bad("0 1 2\n");
  CHECK_THROWS_AS(read_state(bad), InputError);
}
