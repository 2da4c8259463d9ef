#include "treecut/refinement.hpp"

#include "treecut/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace treecut {

RefineParams RefineParams::for_graph(int n) {
  RefineParams p;
  p.n = n;
  p.logn = log2_approx(std::max(n, 2));
  p.loglogn = loglog_approx(n);
  p.c_f = 4 * p.c0 / log2_approx(4.0 / 3.0);
  p.kappa = p.c_phi / 2;
  return p;
}

Rational f_value(int cluster_size, int sigma, int n, const Rational& c_f) {
  if (cluster_size < 1) throw ArgumentError("f needs a nonempty cluster");
  if (2 * static_cast<int64_t>(sigma) < 3 * static_cast<int64_t>(cluster_size))
    throw ArgumentError("sigma must be at least 3/2 of the cluster size");
  return c_f * log2_approx(static_cast<double>(sigma) / cluster_size) * loglog_approx(n);
}

Rational load_envelope(int j, int top, const Rational& loglogn) {
  Rational p = 1;
  for (int l = std::max(j, 1); l <= top; ++l) p *= 1 + 1 / (rat(l) * loglogn);
  return p;
}

bool product_bound_holds(int k, const Rational& c) {
  // c = p/q: compare prod^q with k^(2p).
  Rational prod = 1;
  for (int l = 1; l <= k; ++l) prod *= 1 + c / rat(l);
  mpz_class p = c.get_num(), q = c.get_den();
  Rational lhs = 1;
  for (mpz_class i = 0; i < q; ++i) lhs *= prod;
  mpz_class rhs = 1;
  for (mpz_class i = 0; i < 2 * p; ++i) rhs *= k;
  return lhs <= Rational(rhs);
}

namespace {

std::vector<int> between(const Graph& g, const VertexSet& a, const VertexSet& b) {
  std::vector<char> ma = membership(g.vertex_count(), a), mb = membership(g.vertex_count(), b);
  std::vector<int> out;
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if ((ma[ed.u] && mb[ed.v]) || (ma[ed.v] && mb[ed.u])) out.push_back(e);
  }
  return out;
}

// Boundary split nodes of G~(D) get c(b), base vertices nothing.
Measure boundary_measure(const Graph& g, const ClusterView::View& v) {
  int n = g.vertex_count();
  Measure mu(v.graph.vertex_count(), Rational(0));
  for (int x = 0; x < v.graph.vertex_count(); ++x)
    if (v.to_global[x] >= n) mu[x] = rat_from_int64(g.edge(v.to_global[x] - n).cap);
  return mu;
}

Measure base_indicator(const Graph& g, const ClusterView::View& v) {
  Measure nu(v.graph.vertex_count(), Rational(0));
  for (int x = 0; x < v.graph.vertex_count(); ++x)
    if (v.to_global[x] < g.vertex_count()) nu[x] = 1;
  return nu;
}

VertexSet base_part(const Graph& g, const ClusterView::View& v, const VertexSet& local) {
  VertexSet out;
  for (int x : local)
    if (v.to_global[x] < g.vertex_count()) out.push_back(v.to_global[x]);
  return make_set(out);
}

// Local ids of X plus the boundary split nodes hanging off X.
VertexSet tilde_side(const Graph& g, const ClusterView::View& v, const VertexSet& x) {
  int n = g.vertex_count();
  std::vector<char> in = membership(n, x);
  VertexSet out;
  for (int l = 0; l < v.graph.vertex_count(); ++l) {
    int id = v.to_global[l];
    if (id < n) {
      if (in[id]) out.push_back(l);
    } else {
      const Edge& e = g.edge(id - n);
      if (in[e.u] || in[e.v]) out.push_back(l);
    }
  }
  return out;
}

int stranded(const Graph& g, const ClusterView::View& v, const VertexSet& local, const VertexSet& base) {
  int n = g.vertex_count();
  std::vector<char> side = membership(v.graph.vertex_count(), local);
  std::vector<char> in = membership(n, base);
  int count = 0;
  for (int l = 0; l < v.graph.vertex_count(); ++l) {
    int id = v.to_global[l];
    if (id < n) continue;
    const Edge& e = g.edge(id - n);
    bool want = in[e.u] || in[e.v];
    if (want != static_cast<bool>(side[l])) ++count;
  }
  return count;
}

struct Builder {
  const Graph& g;
  int sigma;
  const RefineParams& p;
  RefinementResult& res;
  int depth_limit;

  void fail(const std::string& m) { res.failures.push_back(m); }

  std::string label(const VertexSet& d) const { return "cluster of " + std::to_string(d.size()); }

  // Base edges between two base sets, as global ids.
  std::vector<int> cut_between(const VertexSet& a, const VertexSet& b) const { return between(g, a, b); }

  RouteResult left_flow(const ClusterView::View& v, const Measure& mu, const Rational& theta,
                        const VertexSet& left, const VertexSet& right) {
    VertexSet lt = tilde_side(g, v, left), rt = tilde_side(g, v, right);
    Measure sinks(mu.size());
    for (size_t x = 0; x < mu.size(); ++x) sinks[x] = p.c0 * theta * mu[x];
    return route_from_cut(v.graph, lt, between(v.graph, lt, rt), sinks, p.congestion);
  }

  // mu_R(R~) against mu_D(D~) for a recursion edge D -> R.
  void contraction(const ClusterView& d, const VertexSet& r, const Rational& theta, bool middle_2c) {
    ClusterView rv(g, r);
    Rational mu_r = rat_from_int64(rv.boundary_capacity());
    Rational mu_d = rat_from_int64(d.boundary_capacity());
    int64_t old_part = 0;
    std::vector<char> in = membership(g.vertex_count(), r);
    for (int e : d.boundary_edges())
      if (in[g.edge(e).u] || in[g.edge(e).v]) old_part += g.edge(e).cap;
    int64_t cut = capacity(g, r, set_minus(d.members(), r));
    if (mu_r > rat_from_int64(old_part + cut)) fail(label(r) + ": boundary grew beyond old part plus cut");
    if (4 * static_cast<int64_t>(r.size()) <= 3 * static_cast<int64_t>(d.size())) return;
    Rational small = p.logn > 4 ? 1 / p.logn : rat(1, 4);
    Rational factor = 1 - (1 - rat(5, 3) * theta) * small;
    if (mu_r <= factor * mu_d) return;
    if (middle_2c && 8 * mu_r <= 7 * mu_d) return;
    fail(label(r) + ": neither size nor boundary measure contracted");
  }

  void measured_c0(const Measure& mu, const Rational& theta, const RouteResult& r) {
    if (r.flow.sink_flow.empty() || theta == 0) return;
    for (size_t x = 0; x < mu.size(); ++x) {
      if (mu[x] == 0 || r.flow.sink_flow[x] == 0) continue;
      Rational c = r.flow.sink_flow[x] / (theta * mu[x]);
      if (c > c0_seen) c0_seen = c;
    }
  }
  Rational c0_seen = 0;

  int add(RefinementNode node) {
    res.tree.nodes.push_back(std::move(node));
    return static_cast<int>(res.tree.nodes.size()) - 1;
  }

  int build(const VertexSet& d, int parent, int left_depth, int depth) {
    if (depth > depth_limit) throw ContractError("refinement recursion exceeded its depth bound");
    RefinementNode node;
    node.set = d;
    node.parent = parent;
    node.left_depth = left_depth;
    node.f = f_value(static_cast<int>(d.size()), sigma, p.n, p.c_f);
    node.theta = p.c_phi / node.f;
    node.phi = node.theta / p.logn;
    ClusterView cv(g, d);
    node.view = cv.tilde();
    const ClusterView::View& v = node.view;
    Measure mu = boundary_measure(g, v), nu = base_indicator(g, v);
    if (measure_total(mu) == 0) {
      node.tag = "empty";
      return add(std::move(node));
    }
    OracleParams op;
    op.phi = node.phi;
    op.logn = p.logn;
    op.threshold = p.threshold;
    op.congestion = p.congestion;
    op.sink_factor = p.c0;
    RefinedOutcome o = refined_cut_or_expander(v.graph, mu, nu, op);
    if (p.verify)
      for (auto& m : check_refined(v.graph, mu, nu, o)) fail(label(d) + ": " + m);
    node.tag = case_name(o.tag);
    if (o.tag == RefinedCase::C1) {
      node.certificate = o.base.certificate;
      return add(std::move(node));
    }

    VertexSet a = base_part(g, v, o.a);
    VertexSet rest = set_minus(d, a);
    node.relocated = stranded(g, v, o.a, a);
    if (o.tag == RefinedCase::C2c) {
      VertexSet a2 = base_part(g, v, o.a2);
      node.relocated += stranded(g, v, o.a2, a2);
      if (a2.empty() || a2.size() == a.size()) throw ContractError("refinement made no progress");
    } else if (a.empty() || rest.empty()) {
      throw ContractError("refinement made no progress");
    }
    if (node.relocated > 0) {
      // Re-verify the sparsity bound on the relocated cut.
      Rational bound = op.c_sparse * node.theta;
      auto s = cut_expansion(v.graph, tilde_side(g, v, a), mu);
      if (s && !(*s < bound) && !rest.empty()) fail(label(d) + ": relocated cut is no longer sparse");
    }

    int self = add(node);
    auto self_node = [&]() -> RefinementNode& { return res.tree.nodes[self]; };

    switch (o.tag) {
      case RefinedCase::C2a:
      case RefinedCase::C2b:
      case RefinedCase::C3a: {
        VertexSet left = o.tag == RefinedCase::C3a ? a : rest;
        VertexSet right = o.tag == RefinedCase::C3a ? rest : a;
        RouteResult fl = left_flow(v, mu, node.theta, left, right);
        measured_c0(mu, node.theta, fl);
        if (!fl.feasible) fail(label(d) + ": left flow infeasible after relocation");
        self_node().flow = std::move(fl);
        self_node().cut_edges = cut_between(left, right);
        contraction(cv, left, node.theta, false);
        contraction(cv, right, node.theta, false);
        int l = build(left, self, left_depth + 1, depth + 1);
        int r = build(right, self, left_depth, depth + 1);
        self_node().left = l;
        self_node().right = r;
        break;
      }
      case RefinedCase::C3b: {
        RouteResult fl = left_flow(v, mu, node.theta, rest, a);
        measured_c0(mu, node.theta, fl);
        if (!fl.feasible) fail(label(d) + ": left flow infeasible after relocation");
        self_node().flow = std::move(fl);
        self_node().cut_edges = cut_between(rest, a);
        contraction(cv, rest, node.theta, false);
        // A stays whole; its expansion follows from G~[A] and the flow into it.
        RefinementNode kept;
        kept.set = a;
        kept.parent = self;
        kept.left_depth = left_depth;
        kept.tag = "3b-kept";
        kept.f = f_value(static_cast<int>(a.size()), sigma, p.n, p.c_f);
        kept.theta = p.c_phi / kept.f;
        kept.phi = kept.theta / p.logn;
        kept.view = ClusterView(g, a).tilde();
        RouteResult into_a = left_flow(v, mu, node.theta, a, rest);
        measured_c0(mu, node.theta, into_a);
        if (o.base.certificate && into_a.feasible) {
          Rational cert = *o.base.certificate;
          Rational recv = 0;
          for (size_t x = 0; x < mu.size(); ++x)
            if (mu[x] > 0 && into_a.flow.sink_flow[x] / mu[x] > recv) recv = into_a.flow.sink_flow[x] / mu[x];
          kept.certificate = cert / (2 * (recv + 1 + into_a.flow.congestion * cert));
        }
        int l = build(rest, self, left_depth + 1, depth + 1);
        int r = add(std::move(kept));
        self_node().left = l;
        self_node().right = r;
        break;
      }
      case RefinedCase::C2c: {
        VertexSet a2 = base_part(g, v, o.a2);
        VertexSet mid = set_minus(a, a2);
        int inner = self;
        if (!rest.empty()) {
          RouteResult fl = left_flow(v, mu, node.theta, rest, a);
          measured_c0(mu, node.theta, fl);
          if (!fl.feasible) fail(label(d) + ": left flow infeasible after relocation");
          self_node().flow = std::move(fl);
          self_node().cut_edges = cut_between(rest, a);
          contraction(cv, rest, node.theta, false);
          RefinementNode in;
          in.set = a;
          in.parent = self;
          in.left_depth = left_depth;
          in.tag = "2c-inner";
          in.f = node.f;
          in.theta = node.theta;
          in.phi = node.phi;
          in.view = node.view;
          inner = add(std::move(in));
          int l = build(rest, self, left_depth + 1, depth + 1);
          self_node().left = l;
          self_node().right = inner;
        }
        // Second cut inside A1, routed with the measure of D.
        RouteResult fl2 = left_flow(v, mu, node.theta, a2, mid);
        measured_c0(mu, node.theta, fl2);
        if (!fl2.feasible) fail(label(d) + ": inner flow infeasible after relocation");
        res.tree.nodes[inner].flow = std::move(fl2);
        res.tree.nodes[inner].cut_edges = cut_between(a2, mid);
        contraction(cv, a2, node.theta, false);
        contraction(cv, mid, node.theta, true);
        int l2 = build(a2, inner, left_depth + 1, depth + 1);
        int r2 = build(mid, inner, left_depth, depth + 1);
        res.tree.nodes[inner].left = l2;
        res.tree.nodes[inner].right = r2;
        break;
      }
      default: break;
    }
    return self;
  }
};

}  // namespace

RefinementResult refine(const ClusterView& view, int sigma, const RefineParams& params) {
  const Graph& g = view.base();
  if (view.size() < 1) throw ArgumentError("refinement needs a nonempty cluster");
  f_value(view.size(), sigma, params.n, params.c_f);  // precondition
  RefinementResult res;
  res.tree.sigma = sigma;
  Builder b{g, sigma, params, res, view.size() + 1};
  b.build(view.members(), -1, 1, 0);
  if (b.c0_seen > params.c0) res.failures.push_back("measured sink constant " + to_string(b.c0_seen) + " exceeds declared c0");

  for (const RefinementNode& node : res.tree.nodes) {
    if (!node.leaf() || node.tag == "2c-inner") continue;
    res.clusters.push_back(node.set);
  }
  std::sort(res.clusters.begin(), res.clusters.end());

  VertexSet covered;
  for (const VertexSet& c : res.clusters) covered = set_union(covered, c);
  size_t total = 0;
  for (const VertexSet& c : res.clusters) total += c.size();
  if (covered != view.members() || total != covered.size()) res.failures.push_back("leaves do not partition the cluster");

  for (const VertexSet& c : res.clusters) {
    LeafCheck lc;
    lc.set = c;
    lc.required = params.kappa / (f_value(static_cast<int>(c.size()), sigma, params.n, params.c_f) * params.logn);
    ClusterView cv(g, c);
    ClusterView::View sub = cv.subdivided();
    Measure w = boundary_measure(g, sub);
    if (measure_total(w) == 0) {
      lc.checked = true;
    } else if (static_cast<int>(c.size()) <= params.threshold) {
      try {
        RatioCut rc = all_to_all_respect_exact(sub.graph, w, params.threshold);
        lc.respect = rc.value;
        lc.checked = true;
        if (rc.value && *rc.value < lc.required) lc.ok = false;
      } catch (const SizeError&) {
      }
    }
    if (!lc.ok)
      res.failures.push_back("leaf of " + std::to_string(c.size()) + " respects its boundary only at " +
                             to_string(lc.respect) + " < " + to_string(lc.required));
    res.leaf_checks.push_back(std::move(lc));
  }
  return res;
}

InterRouting route_inter_to_boundary(const Graph& g, const RefinementTree& tree, const RefineParams& params) {
  InterRouting out;
  if (tree.nodes.empty()) return out;
  int n = g.vertex_count();
  const VertexSet& s = tree.nodes[0].set;
  ClusterView root(g, s);
  ClusterView::View sub = root.subdivided();
  std::vector<Rational> used(sub.graph.edge_count(), Rational(0));
  // split node -> origin -> amount
  std::map<int, std::map<int, Rational>> mass;
  int top = 0;
  for (const RefinementNode& node : tree.nodes) {
    top = std::max(top, node.left_depth);
    if (node.leaf()) continue;
    for (int e : node.cut_edges) mass[n + e][n + e] = rat_from_int64(g.edge(e).cap);
  }
  top = std::max(top, static_cast<int>(to_int64(ceil_q(3 * params.logn))));
  out.phi_by_depth.assign(top + 1, Rational(0));
  out.envelope.assign(top + 1, Rational(0));
  for (int j = 1; j <= top; ++j) out.envelope[j] = load_envelope(j, top, params.loglogn);

  auto total_at = [&](int x) {
    Rational t = 0;
    auto it = mass.find(x);
    if (it != mass.end())
      for (auto& [o, a] : it->second) t += a;
    return t;
  };
  auto use = [&](int a, int b, const Rational& amount) {
    auto le = sub.graph.find_edge(sub.local(a), sub.local(b));
    if (!le) throw ContractError("composite routing left G'[S']");
    used[*le] += amount;
  };

  std::function<void(int)> process = [&](int id) {
    const RefinementNode& node = tree.nodes[id];
    if (node.left >= 0) process(node.left);
    if (node.right >= 0) process(node.right);
    if (!node.leaf()) {
      if (node.left < 0) throw ContractError("binary node without a left child");
      if (node.flow.flow.edge_flow.empty() || node.flow.demand.empty())
        throw ContractError("non-leaf refinement node without a flow");
      if (!node.flow.feasible) out.failures.push_back("node flow infeasible, routing what it carries");
      const ClusterView::View& v = node.view;
      const VertexSet& left = tree.nodes[node.left].set;
      std::vector<char> in_left = membership(n, left);
      // Gather the load waiting on the cut edges at each left endpoint.
      std::map<int, std::map<int, Rational>> at;  // base vertex -> origin -> amount
      for (int e : node.cut_edges) {
        int x = n + e;
        int u = in_left[g.edge(e).u] ? g.edge(e).u : g.edge(e).v;
        Rational moved = total_at(x);
        auto it = mass.find(x);
        if (it != mass.end()) {
          for (auto& [o, a] : it->second) at[u][o] += a;
          mass.erase(it);
        }
        if (moved > 0) use(x, u, moved);
      }
      FlowNetwork net(v.graph);
      net.source = node.flow.demand;
      net.sink = node.flow.flow.sink_flow;
      std::vector<FlowPath> paths = decompose_paths(node.flow.flow, net);
      std::map<int, Rational> sent;  // base vertex -> fraction of demand routed
      for (const FlowPath& path : paths) {
        if (path.vertices.empty()) continue;
        int u = v.to_global[path.vertices.front()];
        int dst = v.to_global[path.vertices.back()];
        auto src = at.find(u);
        Rational dem = node.flow.demand[path.vertices.front()];
        if (dem == 0) continue;
        Rational frac = path.amount / dem;
        sent[u] += frac;
        if (src == at.end()) continue;
        if (dst < n) throw ContractError("node flow ends at a base vertex");
        Rational moved = 0;
        for (auto& [o, a] : src->second) {
          mass[dst][o] += frac * a;
          moved += frac * a;
        }
        if (moved == 0) continue;
        for (size_t i = 0; i + 1 < path.vertices.size(); ++i) {
          int a = v.to_global[path.vertices[i]], b = v.to_global[path.vertices[i + 1]];
          if (b >= n) {
            use(a, b, moved);
          } else {
            int e = *g.find_edge(a, b);
            use(a, n + e, moved);
            use(n + e, b, moved);
          }
        }
      }
      for (auto& [u, comp] : at) {
        Rational have = 0;
        for (auto& [o, a] : comp) have += a;
        if (have > 0 && sent[u] != 1)
          out.failures.push_back("load at vertex " + std::to_string(u) + " only partly routed");
      }
    }
    ClusterView dv(g, node.set);
    Rational phi = 0;
    for (int b : dv.boundary_edges()) {
      Rational l = total_at(n + b) / rat_from_int64(g.edge(b).cap);
      if (l > phi) phi = l;
    }
    if (phi > out.phi_by_depth[node.left_depth]) out.phi_by_depth[node.left_depth] = phi;
  };
  process(0);

  for (int j = 1; j <= top; ++j)
    if (out.phi_by_depth[j] > out.envelope[j])
      out.failures.push_back("load at left depth " + std::to_string(j) + " is " + to_string(out.phi_by_depth[j]) +
                             ", above the envelope " + to_string(out.envelope[j]));

  std::vector<char> on_boundary(n + g.edge_count(), 0);
  for (int b : root.boundary_edges()) on_boundary[n + b] = 1;
  for (auto& [x, comp] : mass) {
    Rational t = 0;
    for (auto& [o, a] : comp) {
      t += a;
      if (a != 0) out.transfer.add(o, x, a);
    }
    if (t == 0) continue;
    if (!on_boundary[x]) {
      out.failures.push_back("load stuck on split node " + std::to_string(x));
      continue;
    }
    out.load[x] = t;
    Rational per = t / rat_from_int64(g.edge(x - n).cap);
    if (per > out.max_load) out.max_load = per;
  }
  for (int e = 0; e < sub.graph.edge_count(); ++e) {
    Rational c = used[e] / rat_from_int64(sub.graph.edge(e).cap);
    if (c > out.congestion) out.congestion = c;
  }
  return out;
}

json refinement_json(const RefinementResult& r) {
  json j;
  j["sigma"] = r.tree.sigma;
  json nodes = json::array();
  for (const RefinementNode& node : r.tree.nodes) {
    json x;
    x["set"] = node.set;
    x["tag"] = node.tag;
    x["left"] = node.left;
    x["right"] = node.right;
    x["left_depth"] = node.left_depth;
    x["f"] = to_string(node.f);
    x["phi"] = to_string(node.phi);
    x["cut_edges"] = node.cut_edges;
    x["relocated"] = node.relocated;
    x["certificate"] = node.certificate ? json(to_string(*node.certificate)) : json(nullptr);
    nodes.push_back(std::move(x));
  }
  j["nodes"] = std::move(nodes);
  j["clusters"] = r.clusters;
  json leaves = json::array();
  for (const LeafCheck& lc : r.leaf_checks) {
    json x;
    x["set"] = lc.set;
    x["required"] = to_string(lc.required);
    x["respect"] = to_string(lc.respect);
    x["checked"] = lc.checked;
    x["ok"] = lc.ok;
    leaves.push_back(std::move(x));
  }
  j["leaf_checks"] = std::move(leaves);
  j["failures"] = r.failures;
  return j;
}

}  // namespace treecut
