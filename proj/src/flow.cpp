#include "treecut/flow.hpp"

#include "treecut/errors.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

namespace treecut {

FlowNetwork::FlowNetwork(Graph g)
    : graph(std::move(g)),
      source(zero_measure(graph.vertex_count())),
      sink(zero_measure(graph.vertex_count())) {}

namespace {

struct Arc {
  int to;
  int rev;
  Rational residual;
};

class Dinic {
 public:
  explicit Dinic(int n) : arcs_(n), level_(n), it_(n) {}

  // Returns the index of the forward arc in arcs_[u].
  int add(int u, int v, const Rational& cap_uv, const Rational& cap_vu) {
    arcs_[u].push_back({v, static_cast<int>(arcs_[v].size()), cap_uv});
    arcs_[v].push_back({u, static_cast<int>(arcs_[u].size()) - 1, cap_vu});
    return static_cast<int>(arcs_[u].size()) - 1;
  }

  Rational run(int s, int t) {
    Rational total = 0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (true) {
        Rational pushed = dfs(s, t, nullptr);
        if (pushed == 0) break;
        total += pushed;
      }
    }
    return total;
  }

  std::vector<char> reachable(int s) const {
    std::vector<char> seen(arcs_.size(), 0);
    std::deque<int> q{s};
    seen[s] = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (const auto& a : arcs_[u])
        if (a.residual > 0 && !seen[a.to]) seen[a.to] = 1, q.push_back(a.to);
    }
    return seen;
  }

  const Arc& arc(int u, int i) const { return arcs_[u][i]; }

 private:
  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::deque<int> q{s};
    level_[s] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (const auto& a : arcs_[u])
        if (a.residual > 0 && level_[a.to] < 0) {
          level_[a.to] = level_[u] + 1;
          q.push_back(a.to);
        }
    }
    return level_[t] >= 0;
  }

  // limit == nullptr means unbounded (only at the source).
  Rational dfs(int u, int t, const Rational* limit) {
    if (u == t) return *limit;
    for (int& i = it_[u]; i < static_cast<int>(arcs_[u].size()); ++i) {
      Arc& a = arcs_[u][i];
      if (a.residual <= 0 || level_[a.to] != level_[u] + 1) continue;
      Rational lim = (limit == nullptr || a.residual < *limit) ? a.residual : *limit;
      Rational got = dfs(a.to, t, &lim);
      if (got > 0) {
        a.residual -= got;
        arcs_[a.to][a.rev].residual += got;
        return got;
      }
    }
    return 0;
  }

  std::vector<std::vector<Arc>> arcs_;
  std::vector<int> level_;
  std::vector<int> it_;
};

}  // namespace

Rational recompute_congestion(const Graph& g, const std::vector<Rational>& edge_flow) {
  Rational worst = 0;
  for (int e = 0; e < g.edge_count(); ++e) {
    Rational r = abs(edge_flow[e]) / g.edge(e).cap;
    if (r > worst) worst = r;
  }
  return worst;
}

MaxFlowResult max_flow(const FlowNetwork& net) {
  const Graph& g = net.graph;
  int n = g.vertex_count();
  if (static_cast<int>(net.source.size()) != n || static_cast<int>(net.sink.size()) != n)
    throw ArgumentError("flow network attachments do not match the graph");
  int s = n, t = n + 1;
  Dinic d(n + 2);
  std::vector<int> edge_arc(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    Rational c = net.edge_scale * g.edge(e).cap;
    edge_arc[e] = d.add(g.edge(e).u, g.edge(e).v, c, c);
  }
  std::vector<int> src_arc(n, -1), snk_arc(n, -1);
  for (int v = 0; v < n; ++v) {
    if (net.source[v] < 0 || net.sink[v] < 0) throw ArgumentError("negative attachment capacity");
    if (net.source[v] > 0) src_arc[v] = d.add(s, v, net.source[v], 0);
    if (net.sink[v] > 0) snk_arc[v] = d.add(v, t, net.sink[v], 0);
  }
  MaxFlowResult res;
  FlowSolution& f = res.flow;
  f.value = d.run(s, t);
  f.edge_flow.assign(g.edge_count(), 0);
  for (int e = 0; e < g.edge_count(); ++e) {
    Rational c = net.edge_scale * g.edge(e).cap;
    f.edge_flow[e] = c - d.arc(g.edge(e).u, edge_arc[e]).residual;
  }
  f.source_flow = zero_measure(n);
  f.sink_flow = zero_measure(n);
  for (int v = 0; v < n; ++v) {
    if (src_arc[v] >= 0) f.source_flow[v] = net.source[v] - d.arc(s, src_arc[v]).residual;
    if (snk_arc[v] >= 0) f.sink_flow[v] = net.sink[v] - d.arc(v, snk_arc[v]).residual;
  }
  f.congestion = recompute_congestion(g, f.edge_flow);
  auto seen = d.reachable(s);
  res.source_side.assign(seen.begin(), seen.begin() + n);
  return res;
}

MaxFlowResult fair_cut(const FlowNetwork& net, const Rational& alpha) {
  if (alpha < 1) throw ArgumentError("fair cut needs alpha >= 1");
  return max_flow(net);
}

std::string check_flow(const FlowNetwork& net, const FlowSolution& sol) {
  const Graph& g = net.graph;
  int n = g.vertex_count();
  if (static_cast<int>(sol.edge_flow.size()) != g.edge_count() ||
      static_cast<int>(sol.source_flow.size()) != n || static_cast<int>(sol.sink_flow.size()) != n)
    return "flow has the wrong shape";
  Measure excess(n, 0);
  Rational value = 0;
  for (int v = 0; v < n; ++v) {
    if (sol.source_flow[v] < 0 || sol.source_flow[v] > net.source[v])
      return "source flow out of range at " + std::to_string(v);
    if (sol.sink_flow[v] < 0 || sol.sink_flow[v] > net.sink[v])
      return "sink flow out of range at " + std::to_string(v);
    excess[v] = sol.source_flow[v] - sol.sink_flow[v];
    value += sol.source_flow[v];
  }
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if (abs(sol.edge_flow[e]) > net.edge_scale * ed.cap)
      return "edge " + std::to_string(ed.u) + "-" + std::to_string(ed.v) + " over capacity";
    excess[ed.u] -= sol.edge_flow[e];
    excess[ed.v] += sol.edge_flow[e];
  }
  for (int v = 0; v < n; ++v)
    if (excess[v] != 0) return "flow not conserved at " + std::to_string(v);
  if (value != sol.value) return "flow value mismatch";
  return "";
}

Rational TransferMatrix::total() const {
  Rational t = 0;
  for (const auto& [k, v] : entries) t += v;
  return t;
}

Measure TransferMatrix::row_sums(int n) const {
  Measure r(n, 0);
  for (const auto& [k, v] : entries) r[k.first] += v;
  return r;
}

Measure TransferMatrix::col_sums(int n) const {
  Measure r(n, 0);
  for (const auto& [k, v] : entries) r[k.second] += v;
  return r;
}

void TransferMatrix::add(int from, int to, const Rational& amount) {
  if (amount == 0) return;
  Rational& x = entries[{from, to}];
  x += amount;
  if (x == 0) entries.erase({from, to});
}

std::vector<FlowPath> decompose_paths(const FlowSolution& sol, const FlowNetwork& net) {
  const Graph& g = net.graph;
  int n = g.vertex_count();
  {
    Measure excess(n, 0);
    for (int v = 0; v < n; ++v) excess[v] = sol.source_flow[v] - sol.sink_flow[v];
    for (int e = 0; e < g.edge_count(); ++e) {
      excess[g.edge(e).u] -= sol.edge_flow[e];
      excess[g.edge(e).v] += sol.edge_flow[e];
    }
    for (int v = 0; v < n; ++v)
      if (excess[v] != 0) throw ContractError("flow not conserved at vertex " + std::to_string(v));
  }
  // Directed residue of the flow.
  std::vector<Rational> along(g.edge_count());  // flow in the direction of travel
  for (int e = 0; e < g.edge_count(); ++e) along[e] = abs(sol.edge_flow[e]);
  auto tail = [&](int e) { return sol.edge_flow[e] > 0 ? g.edge(e).u : g.edge(e).v; };
  Measure supply = sol.source_flow, demand = sol.sink_flow;

  std::vector<FlowPath> paths;
  std::vector<int> parent_edge(n), dist(n);
  for (int src = 0; src < n; ++src) {
    while (supply[src] > 0) {
      std::fill(dist.begin(), dist.end(), -1);
      std::deque<int> q{src};
      dist[src] = 0;
      int target = -1;
      while (!q.empty() && target < 0) {
        int u = q.front();
        q.pop_front();
        if (demand[u] > 0) {
          target = u;
          break;
        }
        for (const auto& inc : g.incident(u)) {
          int e = inc.edge;
          if (along[e] > 0 && tail(e) == u && dist[inc.neighbor] < 0) {
            dist[inc.neighbor] = dist[u] + 1;
            parent_edge[inc.neighbor] = e;
            q.push_back(inc.neighbor);
          }
        }
      }
      if (target < 0) throw ContractError("flow decomposition stuck; flow not conserved");
      FlowPath p;
      Rational amt = supply[src] < demand[target] ? supply[src] : demand[target];
      for (int v = target; v != src; v = g.edge(parent_edge[v]).other(v)) {
        p.vertices.push_back(v);
        if (along[parent_edge[v]] < amt) amt = along[parent_edge[v]];
      }
      p.vertices.push_back(src);
      std::reverse(p.vertices.begin(), p.vertices.end());
      for (int v = target; v != src; v = g.edge(parent_edge[v]).other(v)) along[parent_edge[v]] -= amt;
      supply[src] -= amt;
      demand[target] -= amt;
      p.amount = amt;
      paths.push_back(std::move(p));
    }
  }
  return paths;
}

TransferMatrix decompose(const FlowSolution& sol, const FlowNetwork& net) {
  TransferMatrix m;
  for (const auto& p : decompose_paths(sol, net)) m.add(p.vertices.front(), p.vertices.back(), p.amount);
  return m;
}

RouteResult route_demand(const Graph& g, const VertexSet& d, const Measure& demand,
                         const Measure& sink_caps, const Rational& congestion) {
  Subgraph sub = induced(g, d);
  FlowNetwork net(sub.graph);
  net.edge_scale = congestion;
  RouteResult r;
  r.demand = zero_measure(g.vertex_count());
  Rational need = 0;
  for (size_t i = 0; i < d.size(); ++i) {
    net.source[i] = demand[d[i]];
    net.sink[i] = sink_caps[d[i]];
    r.demand[d[i]] = demand[d[i]];
    need += demand[d[i]];
  }
  auto mf = max_flow(net);
  r.feasible = mf.flow.value == need;
  FlowSolution& f = r.flow;
  f.edge_flow.assign(g.edge_count(), 0);
  f.source_flow = zero_measure(g.vertex_count());
  f.sink_flow = zero_measure(g.vertex_count());
  for (int e = 0; e < sub.graph.edge_count(); ++e) {
    int pe = sub.edge_to_parent[e];
    // Local edges keep endpoint order up to relabeling; fix the sign.
    bool same = sub.to_parent[sub.graph.edge(e).u] == g.edge(pe).u;
    f.edge_flow[pe] = same ? mf.flow.edge_flow[e] : -mf.flow.edge_flow[e];
  }
  for (size_t i = 0; i < d.size(); ++i) {
    f.source_flow[d[i]] = mf.flow.source_flow[i];
    f.sink_flow[d[i]] = mf.flow.sink_flow[i];
  }
  f.value = mf.flow.value;
  f.congestion = recompute_congestion(g, f.edge_flow);
  if (!r.feasible)
    for (size_t i = 0; i < d.size(); ++i)
      if (mf.source_side[i]) r.certificate.push_back(d[i]);
  return r;
}

RouteResult route_from_cut(const Graph& g, const VertexSet& d, const std::vector<int>& cut_edges,
                           const Measure& sink_caps, const Rational& congestion) {
  auto in_d = membership(g.vertex_count(), d);
  Measure demand = zero_measure(g.vertex_count());
  for (int e : cut_edges) {
    const Edge& ed = g.edge(e);
    if (in_d[ed.u] == in_d[ed.v]) throw ArgumentError("cut edge does not have exactly one endpoint in D");
    demand[in_d[ed.u] ? ed.u : ed.v] += ed.cap;
  }
  return route_demand(g, d, demand, sink_caps, congestion);
}

void write_flow(std::ostream& out, const Graph& g, const FlowSolution& sol) {
  for (int e = 0; e < g.edge_count(); ++e) {
    if (sol.edge_flow[e] == 0) continue;
    const Edge& ed = g.edge(e);
    if (sol.edge_flow[e] > 0)
      out << ed.u << ' ' << ed.v << ' ' << to_string(sol.edge_flow[e]) << '\n';
    else
      out << ed.v << ' ' << ed.u << ' ' << to_string(Rational(-sol.edge_flow[e])) << '\n';
  }
}

}  // namespace treecut
