#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "brute_force.hpp"
#include "treecut/errors.hpp"
#include "treecut/random_graphs.hpp"
#include "treecut/refinement.hpp"

#include <map>

using namespace treecut;

namespace {

void require_clean(const std::vector<std::string>& msgs) {
  for (const auto& m : msgs) MESSAGE(m);
  CHECK(msgs.empty());
}

Measure split_weights(const Graph& g, const ClusterView::View& v) {
  Measure w(v.graph.vertex_count(), Rational(0));
  for (int x = 0; x < v.graph.vertex_count(); ++x)
    if (v.to_global[x] >= g.vertex_count()) w[x] = rat_from_int64(g.edge(v.to_global[x] - g.vertex_count()).cap);
  return w;
}

// Two K4 blocks {0..3}, {4..7} joined by the bridge 3-4. Every block vertex
// has an edge of capacity `heavy` to its block's hub (8 or 9).
Graph bridged_blocks(int64_t heavy) {
  Graph g(10);
  for (int b = 0; b < 2; ++b)
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) g.add_edge(4 * b + i, 4 * b + j, 1);
      g.add_edge(4 * b + i, 8 + b, heavy);
    }
  g.add_edge(3, 4, 1);
  return g;
}

// Cluster 0..k-1 on a random connected graph; hubs k..k+h-1 hang off it with
// heavy edges, so the refinement sees sparse cuts.
Graph heavy_boundary(int k, int hubs, std::mt19937_64& rng) {
  Graph inner = random_graph(k, 0.3, 2, true, rng);
  Graph g(k + hubs);
  for (const Edge& e : inner.edges()) g.add_edge(e.u, e.v, e.cap);
  std::uniform_int_distribution<int> hub(k, k + hubs - 1);
  std::uniform_int_distribution<int> cap(500, 5000);
  std::uniform_real_distribution<double> coin(0, 1);
  for (int v = 0; v < k; ++v)
    if (coin(rng) < 0.8) g.add_edge(v, hub(rng), cap(rng));
  for (int h = k; h < k + hubs; ++h)
    if (g.incident(h).empty()) g.add_edge(h, 0, 50);
  return g;
}

Rational inter_capacity(const Graph& g, const RefinementTree& t) {
  Rational c = 0;
  for (const RefinementNode& node : t.nodes)
    for (int e : node.cut_edges) c += rat_from_int64(g.edge(e).cap);
  return c;
}

// Binary node on set d with the flow into `left` built the way refine does.
RefinementNode hand_node(const Graph& g, const VertexSet& d, const VertexSet& left, int sigma,
                         const RefineParams& p, int depth) {
  RefinementNode node;
  node.set = d;
  node.left_depth = depth;
  node.f = f_value(static_cast<int>(d.size()), sigma, p.n, p.c_f);
  node.theta = p.c_phi / node.f;
  node.phi = node.theta / p.logn;
  node.view = ClusterView(g, d).tilde();
  const ClusterView::View& v = node.view;
  VertexSet right = set_minus(d, left);
  VertexSet lt, rt;
  Measure sinks(v.graph.vertex_count(), Rational(0));
  for (int x = 0; x < v.graph.vertex_count(); ++x) {
    int id = v.to_global[x];
    bool in_left;
    if (id < g.vertex_count()) {
      in_left = contains(left, id);
    } else {
      const Edge& e = g.edge(id - g.vertex_count());
      in_left = contains(left, e.u) || contains(left, e.v);
      sinks[x] = p.c0 * node.theta * rat_from_int64(e.cap);
    }
    (in_left ? lt : rt).push_back(x);
  }
  std::vector<int> cut_local;
  for (int e = 0; e < v.graph.edge_count(); ++e) {
    const Edge& ed = v.graph.edge(e);
    if (contains(lt, ed.u) != contains(lt, ed.v)) cut_local.push_back(e);
  }
  node.flow = route_from_cut(v.graph, lt, cut_local, sinks, p.congestion);
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if ((contains(left, ed.u) && contains(right, ed.v)) || (contains(left, ed.v) && contains(right, ed.u)))
      node.cut_edges.push_back(e);
  }
  return node;
}

RefinementNode leaf_node(const VertexSet& d, int depth) {
  RefinementNode node;
  node.set = d;
  node.left_depth = depth;
  node.tag = "1";
  return node;
}

// Path 0..7 where each vertex has a heavy edge to the hub 8.
Graph heavy_path() {
  Graph g(9);
  for (int i = 0; i + 1 < 8; ++i) g.add_edge(i, i + 1, 1);
  for (int i = 0; i < 8; ++i) g.add_edge(i, 8, 4000);
  return g;
}

}  // namespace

TEST_CASE("f_value") {
  CHECK(f_value(4, 8, 16, 1) == 2);
  CHECK(f_value(2, 3, 16, 1) == log2_approx(1.5) * 2);
  CHECK_THROWS_AS(f_value(4, 5, 16, 1), ArgumentError);
  CHECK_THROWS_AS(f_value(0, 5, 16, 1), ArgumentError);

  // |S| = sigma (3/4)^j gives f >= 4 c0 j loglog n with the default c_f.
  RefineParams p = RefineParams::for_graph(1024);
  CHECK(p.c_f == rat(4096, 425));
  int sigma = 4, size = 3;
  for (int j = 2; j <= 5; ++j) {
    sigma *= 4;
    size *= 3;
    CHECK(f_value(size, sigma, 1024, p.c_f) >= 4 * p.c0 * j * p.loglogn);
  }
}

TEST_CASE("constants satisfy both sparsity budgets") {
  RefineParams p = RefineParams::for_graph(64);
  Rational c_sparse = rat(5, 3);
  // Cuts are below c_sparse * c_phi / f: within 1/(2f), and within 1/(16f) for 2c.
  CHECK(c_sparse * p.c_phi <= rat(1, 16));
  CHECK(c_sparse * p.c_phi == rat(1, 16));
  CHECK(p.kappa == p.c_phi / 2);
}

TEST_CASE("harmonic product stays below k^(2c)") {
  for (Rational c : {rat(1, 4), rat(1, 2), rat(1), rat(2)})
    for (int k = 3; k <= 64; ++k) CHECK(product_bound_holds(k, c));
  CHECK_FALSE(product_bound_holds(1, rat(1, 2)));
}

TEST_CASE("load envelope") {
  CHECK(load_envelope(3, 2, 1) == 1);
  CHECK(load_envelope(1, 2, 1) == rat(3));
  CHECK(load_envelope(2, 3, 2) == rat(5, 4) * rat(7, 6));
}

TEST_CASE("refine without boundary returns the cluster") {
  Graph g = complete_graph(5);
  ClusterView v(g, all_vertices(5));
  RefineParams p = RefineParams::for_graph(5);
  RefinementResult r = refine(v, 8, p);
  require_clean(r.failures);
  REQUIRE(r.clusters.size() == 1);
  CHECK(r.clusters[0] == all_vertices(5));
  CHECK(r.tree.nodes[0].tag == "empty");
  CHECK_THROWS_AS(refine(v, 7, p), ArgumentError);

  InterRouting ir = route_inter_to_boundary(g, r.tree, p);
  CHECK(ir.load.empty());
  CHECK(ir.congestion == 0);
  require_clean(ir.failures);
}

TEST_CASE("refine keeps an expanding cluster whole") {
  // K5 with a pendant per vertex; the boundary split nodes expand well.
  Graph g(10);
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) g.add_edge(i, j, 1);
    g.add_edge(i, 5 + i, 1);
  }
  ClusterView v(g, all_vertices(5));
  RefineParams p = RefineParams::for_graph(10);
  RefinementResult r = refine(v, 10, p);
  require_clean(r.failures);
  REQUIRE(r.clusters.size() == 1);
  CHECK(r.tree.nodes[0].tag == "1");

  const RefinementNode& root = r.tree.nodes[0];
  Measure mu = split_weights(g, root.view);
  auto exp = brute::expansion(root.view.graph, mu);
  REQUIRE(exp);
  CHECK(*exp >= root.theta);
  CHECK(*exp == 1);  // a split node alone behind its pendant edge
  REQUIRE(root.certificate);
  CHECK(*root.certificate <= *exp);
}

TEST_CASE("refine splits a cluster at a sparse bridge") {
  Graph g = bridged_blocks(300);
  VertexSet s = all_vertices(8);
  ClusterView v(g, s);
  RefineParams p = RefineParams::for_graph(10);
  RefinementResult r = refine(v, 15, p);
  require_clean(r.failures);
  REQUIRE(r.clusters.size() >= 2);
  for (const VertexSet& c : r.clusters) {
    bool first = c.front() < 4, last = c.back() < 4;
    CHECK(first == last);  // no leaf straddles the bridge
  }
  for (const LeafCheck& lc : r.leaf_checks) {
    CHECK(lc.checked);
    CHECK(lc.ok);
    ClusterView cv(g, lc.set);
    ClusterView::View sub = cv.subdivided();
    Measure w = split_weights(g, sub);
    if (sub.graph.vertex_count() <= 20) {
      auto a2a = brute::all_to_all(sub.graph, w);
      REQUIRE(a2a);
      CHECK(*a2a == *lc.respect);
    }
    // X_B expands in G'[S_i'] at the required rate.
    VertexSet xb;
    for (int x = 0; x < sub.graph.vertex_count(); ++x)
      if (w[x] > 0) xb.push_back(x);
    CHECK(set_expands_exact(sub.graph, xb, w, lc.required).expands);
  }

  InterRouting ir = route_inter_to_boundary(g, r.tree, p);
  require_clean(ir.failures);
  // Only the bridge is inter-cluster; its unit ends on the hub edges.
  Rational total = 0;
  for (auto& [x, a] : ir.load) total += a;
  CHECK(total == inter_capacity(g, r.tree));
  CHECK(ir.transfer.total() == total);
}

TEST_CASE("route_inter_to_boundary on a one-cut tree") {
  Graph g = heavy_path();
  RefineParams p = RefineParams::for_graph(9);
  RefinementTree t;
  t.sigma = 12;
  VertexSet all = all_vertices(8), left = make_set({0, 1, 2, 3});
  t.nodes.push_back(hand_node(g, all, left, 12, p, 1));
  t.nodes.push_back(leaf_node(left, 2));
  t.nodes.push_back(leaf_node(set_minus(all, left), 1));
  t.nodes[0].left = 1;
  t.nodes[0].right = 2;
  REQUIRE(t.nodes[0].flow.feasible);
  REQUIRE(t.nodes[0].cut_edges.size() == 1);

  InterRouting ir = route_inter_to_boundary(g, t, p);
  require_clean(ir.failures);
  Rational bound = 1 + 2 * p.c0 * t.nodes[0].theta;
  CHECK(ir.max_load <= bound);
  CHECK(ir.phi_by_depth[2] == 1);
  CHECK(ir.phi_by_depth[1] <= ir.phi_by_depth[2] * (1 + 4 * p.c0 / t.nodes[0].f));
  Rational total = 0;
  for (auto& [x, a] : ir.load) {
    int e = x - g.vertex_count();
    CHECK(g.edge(e).v == 8);
    CHECK(contains(left, g.edge(e).u));  // only the left side receives
    total += a;
  }
  CHECK(total == 1);
  CHECK(ir.congestion > 0);
  CHECK(ir.congestion <= p.congestion);

  RefinementTree broken = t;
  broken.nodes[0].flow = RouteResult{};
  CHECK_THROWS_AS(route_inter_to_boundary(g, broken, p), ContractError);
}

TEST_CASE("route_inter_to_boundary on a hand-built tree of left depth 4") {
  Graph g = heavy_path();
  RefineParams p = RefineParams::for_graph(9);
  RefinementTree t;
  t.sigma = 12;
  t.nodes.push_back(hand_node(g, all_vertices(8), make_set({0, 1, 2, 3}), 12, p, 1));  // 0
  t.nodes.push_back(hand_node(g, make_set({0, 1, 2, 3}), make_set({0, 1}), 12, p, 2));   // 1
  t.nodes.push_back(leaf_node(make_set({4, 5, 6, 7}), 1));                               // 2
  t.nodes.push_back(hand_node(g, make_set({0, 1}), make_set({0}), 12, p, 3));            // 3
  t.nodes.push_back(leaf_node(make_set({2, 3}), 2));                                     // 4
  t.nodes.push_back(leaf_node(make_set({0}), 4));                                        // 5
  t.nodes.push_back(leaf_node(make_set({1}), 3));                                        // 6
  t.nodes[0].left = 1, t.nodes[0].right = 2;
  t.nodes[1].left = 3, t.nodes[1].right = 4;
  t.nodes[3].left = 5, t.nodes[3].right = 6;
  for (int i : {0, 1, 3}) REQUIRE(t.nodes[i].flow.feasible);

  InterRouting ir = route_inter_to_boundary(g, t, p);
  require_clean(ir.failures);
  int top = static_cast<int>(ir.envelope.size()) - 1;
  CHECK(top == 10);  // ceil(3 log2 9)
  for (int j = 1; j <= top; ++j) CHECK(ir.phi_by_depth[j] <= ir.envelope[j]);
  CHECK(ir.max_load <= load_envelope(1, top, p.loglogn));
  Rational total = 0;
  for (auto& [x, a] : ir.load) total += a;
  CHECK(total == 3);
  CHECK(ir.transfer.total() == 3);
  // Every unit ends on a hub edge of the vertex at the left end of its cut.
  for (auto& [key, a] : ir.transfer.entries) CHECK(a > 0);
}

TEST_CASE("refine contracts on random clusters with heavy boundaries") {
  std::mt19937_64 rng(611);
  int split = 0, checked = 0, relocated = 0;
  std::map<std::string, int> tags;
  for (int round = 0; round < 60; ++round) {
    int k = 4 + static_cast<int>(rng() % 7);
    int hubs = 1 + static_cast<int>(rng() % 3);
    Graph g = heavy_boundary(k, hubs, rng);
    int n = g.vertex_count();
    ClusterView v(g, all_vertices(k));
    RefineParams p = RefineParams::for_graph(n);
    int sigma = (3 * k + 1) / 2 + static_cast<int>(rng() % 4);
    RefinementResult r = refine(v, sigma, p);
    require_clean(r.failures);
    if (r.clusters.size() > 1) ++split;
    for (const RefinementNode& node : r.tree.nodes) {
      ++tags[node.tag];
      relocated += node.relocated;
    }

    size_t total = 0;
    for (const VertexSet& c : r.clusters) total += c.size();
    CHECK(total == static_cast<size_t>(k));
    for (const LeafCheck& lc : r.leaf_checks) {
      CHECK(lc.ok);
      ClusterView cv(g, lc.set);
      ClusterView::View sub = cv.subdivided();
      if (sub.graph.vertex_count() > 16 || !lc.respect) continue;
      auto a2a = brute::all_to_all(sub.graph, split_weights(g, sub));
      REQUIRE(a2a);
      CHECK(*a2a == *lc.respect);
      ++checked;
    }

    InterRouting ir = route_inter_to_boundary(g, r.tree, p);
    require_clean(ir.failures);
    Rational moved = 0;
    for (auto& [x, a] : ir.load) moved += a;
    CHECK(moved == inter_capacity(g, r.tree));
  }
  std::string seen;
  for (auto& [t, c] : tags) seen += t + "=" + std::to_string(c) + " ";
  MESSAGE("split " << split << " of 60, brute-checked leaves " << checked << ", relocated " << relocated
                   << ", tags " << seen);
  CHECK(split > 0);
  CHECK(checked > 0);
}
