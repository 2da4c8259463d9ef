#include "treecut/merge_phase.hpp"

#include "treecut/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace treecut {

Rational MergeParams::shrink_factor() const {
  Rational small = rat(1, 4);
  if (logn > 4) small = 1 / logn;
  return 1 - (1 - theta) * small;
}

int balance_limit(int s) { return s <= 1 ? s : (2 * s) / 3; }

int64_t edge_capacity(const Graph& g, const std::vector<int>& edges) {
  int64_t c = 0;
  for (int e : edges) c += g.edge(e).cap;
  return c;
}

std::vector<VertexSet> components_without(const ClusterView& view, const std::vector<int>& f) {
  const Graph& g = view.base();
  const VertexSet& s = view.members();
  std::vector<int> parent(g.vertex_count());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<char> removed(g.edge_count(), 0);
  for (int e : f) removed[e] = 1;
  for (int e : view.internal_edges()) {
    if (removed[e]) continue;
    int a = find(g.edge(e).u), b = find(g.edge(e).v);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<VertexSet> out;
  std::vector<int> slot(g.vertex_count(), -1);
  for (int v : s) {
    int r = find(v);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[slot[r]].push_back(v);
  }
  return out;  // members are visited in increasing order, so sets are sorted
}

bool induces_balanced(const ClusterView& view, const std::vector<int>& f) {
  int limit = balance_limit(view.size());
  for (const auto& c : components_without(view, f))
    if (static_cast<int>(c.size()) > limit) return false;
  return true;
}

namespace {

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<int> edge_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return sorted_unique(std::move(out));
}

std::optional<Rational> exact_expansion(const Graph& g, const Measure& mu, int threshold) {
  try {
    return graph_expansion_exact(g, mu, threshold);
  } catch (const SizeError&) {
    return std::nullopt;
  }
}

// Capacity-weighted indicator of the split nodes of `edges` in a view.
Measure split_measure(const Graph& base, const ClusterView::View& v, const std::vector<int>& edges) {
  int n = base.vertex_count();
  Measure mu = zero_measure(v.graph.vertex_count());
  for (int e : edges) {
    auto it = v.from_global.find(n + e);
    if (it != v.from_global.end()) mu[it->second] = rat_from_int64(base.edge(e).cap);
  }
  return mu;
}

}  // namespace

ShrinkResult shrink_step(const ClusterView& view, const std::vector<int>& f_in, const MergeParams& params) {
  const Graph& g = view.base();
  int n = g.vertex_count();
  std::vector<int> f = sorted_unique(f_in);
  if (!induces_balanced(view, f)) throw ContractError("shrink_step: edge set does not induce a balanced clustering");
  ShrinkResult res;
  res.view = view.subdivided_induced();
  const Graph& gs = res.view.graph;
  Measure mu = split_measure(g, res.view, f);

  if (f.empty()) {
    res.terminal = true;
    res.choice = "expander";
    return res;
  }

  OracleParams op;
  op.phi = params.phi();
  op.logn = params.logn;
  op.threshold = params.threshold;
  op.congestion = params.congestion;
  op.promote_small = true;
  res.outcome = cut_or_expander(gs, mu, op);
  res.oracle_called = true;
  const OracleOutcome& o = res.outcome;

  if (o.tag == OracleCase::Expander) {
    res.terminal = true;
    res.choice = "expander";
    res.f_tilde = f;
    res.a_tilde = f;
    res.a_expansion = o.certificate;
    res.alpha_bound = o.certificate;
    return res;
  }

  // Edge preimages of the G[S]' cut.
  std::vector<char> in_a(gs.vertex_count(), 0);
  for (int v : o.a) in_a[v] = 1;
  std::vector<int> a_edges, c_edges;
  for (int e : view.internal_edges())
    if (in_a[res.view.local(n + e)]) a_edges.push_back(e);
  for (const Edge& ed : gs.edges()) {
    if (in_a[ed.u] == in_a[ed.v]) continue;
    int x = res.view.to_global[ed.u] >= n ? ed.u : ed.v;
    c_edges.push_back(res.view.to_global[x] - n);
  }
  a_edges = sorted_unique(a_edges);
  c_edges = sorted_unique(c_edges);
  std::vector<int> f_in_a = set_intersection(f, a_edges);
  std::vector<int> f_out_a = set_minus(f, a_edges);
  auto with_c = [&](const std::vector<int>& part) { return edge_union(part, c_edges); };

  if (o.tag == OracleCase::BalancedCut) {
    std::vector<int> first = with_c(f_in_a), second = with_c(f_out_a);
    bool b1 = induces_balanced(view, first), b2 = induces_balanced(view, second);
    if (!b1 && !b2) throw ContractError("separator choice: neither side of the separator induces a balanced clustering");
    bool take_first = b1 && (!b2 || edge_capacity(g, first) <= edge_capacity(g, second));
    res.choice = take_first ? "A+C" : "F-A+C";
    res.f_tilde = take_first ? first : second;
    return res;
  }

  // Unbalanced: R~ = F \ A is small and A expands.
  std::vector<int> shrink = with_c(f_out_a);
  if (induces_balanced(view, shrink)) {
    res.choice = "R+C";
    res.f_tilde = shrink;
    return res;
  }
  std::vector<int> keep = with_c(f_in_a);
  if (!induces_balanced(view, keep))
    throw ContractError("separator choice: neither side of the separator induces a balanced clustering");
  res.terminal = true;
  res.choice = "A+C terminal";
  res.f_tilde = keep;
  res.a_tilde = f_in_a;
  res.c_tilde = c_edges;
  res.a_expansion = o.certificate;
  if (!c_edges.empty()) {
    Measure demand = split_measure(g, res.view, c_edges);
    Measure sinks = split_measure(g, res.view, f_in_a);
    res.flow = route_demand(gs, all_vertices(gs.vertex_count()), demand, sinks, params.congestion + 1);
    if (!res.flow.feasible) throw ContractError("separator step: no flow from X_C into X_A within the caps");
    for (int e : f_in_a) {
      int x = res.view.local(n + e);
      Rational got = res.flow.flow.sink_flow[x] / rat_from_int64(g.edge(e).cap);
      if (got > res.received) res.received = got;
    }
    res.congestion = res.flow.flow.congestion;
  }
  if (res.a_expansion) {
    const Rational& p = *res.a_expansion;
    res.alpha_bound = p / (2 * (res.received + 1 + res.congestion * p));
  }
  return res;
}

BalancedClustering merge_phase_1(const ClusterView& view, const MergeParams& params) {
  const Graph& g = view.base();
  BalancedClustering out;
  out.s = view.members();
  std::vector<int> f = view.internal_edges();
  Rational rho = params.shrink_factor();
  int64_t total = std::max<int64_t>(edge_capacity(g, f), 1);
  out.iteration_bound =
      static_cast<int>(std::ceil(std::log(static_cast<double>(total)) / -std::log(to_double(rho)))) + 2;

  while (true) {
    ShrinkResult r = shrink_step(view, f, params);
    ShrinkRecord rec;
    rec.oracle_case = r.outcome.tag;
    rec.from_case3 = r.outcome.from_case3;
    rec.choice = r.choice;
    rec.before = edge_capacity(g, f);
    rec.after = edge_capacity(g, r.f_tilde);
    out.history.push_back(rec);
    if (params.verify && r.oracle_called) {
      Measure mu = split_measure(g, r.view, f);
      for (const auto& m : check_outcome(r.view.graph, mu, r.outcome)) out.failures.push_back("oracle: " + m);
    }
    if (r.terminal) {
      out.f_tilde = r.f_tilde;
      out.alpha_bound = r.alpha_bound;
      if (params.verify && r.alpha_bound && r.outcome.certificate_exact) {
        Measure mu = split_measure(g, r.view, r.f_tilde);
        auto ex = exact_expansion(r.view.graph, mu, params.threshold);
        if (ex && *ex < *r.alpha_bound) out.failures.push_back("composed bound: X_F~ expands below the composed bound");
      }
      break;
    }
    if (Rational(rat_from_int64(rec.after)) > rho * rat_from_int64(rec.before))
      out.failures.push_back("shrink step " + std::to_string(out.shrink_iterations) + " shrank by less than " +
                             to_string(rho));
    if (!induces_balanced(view, r.f_tilde)) out.failures.push_back("shrink step lost balance");
    f = r.f_tilde;
    if (++out.shrink_iterations > out.iteration_bound)
      throw ContractError("merge_phase_1: shrink iterations exceeded the bound " +
                          std::to_string(out.iteration_bound));
  }

  out.z = components_without(view, out.f_tilde);
  std::sort(out.z.begin(), out.z.end());
  std::vector<int> comp(g.vertex_count(), -1);
  for (size_t i = 0; i < out.z.size(); ++i)
    for (int v : out.z[i]) comp[v] = static_cast<int>(i);
  for (int e : view.internal_edges())
    if (comp[g.edge(e).u] != comp[g.edge(e).v]) out.f.push_back(e);

  if (params.verify) {
    int limit = balance_limit(view.size());
    for (const auto& z : out.z)
      if (static_cast<int>(z.size()) > limit)
        out.failures.push_back("cluster Z of size " + std::to_string(z.size()) + " exceeds " + std::to_string(limit));
    ClusterView::View gs = view.subdivided_induced();
    out.alpha_tilde = exact_expansion(gs.graph, split_measure(g, gs, out.f_tilde), params.threshold);
    out.alpha_measured = exact_expansion(gs.graph, split_measure(g, gs, out.f), params.threshold);
  }
  return out;
}

std::vector<VertexSet> MergePartition::children() const {
  std::vector<VertexSet> out = l_parts;
  out.insert(out.end(), r_parts.begin(), r_parts.end());
  return out;
}

namespace {

// Split pieces of each Z_i restricted to `side`, as connected components.
std::vector<VertexSet> pieces(const ClusterView& view, const std::vector<VertexSet>& z, const VertexSet& side) {
  std::vector<VertexSet> out;
  for (const auto& zi : z) {
    VertexSet part = set_intersection(zi, side);
    if (part.empty()) continue;
    for (auto& c : components(view.base(), part)) out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct LocalSets {
  std::vector<char> x_f, x_b;
  Measure mu_tau;
};

LocalSets local_sets(const ClusterView& view, const ClusterView::View& gv, const std::vector<int>& f,
                     const Rational& tau) {
  const Graph& g = view.base();
  int n = g.vertex_count();
  int nl = gv.graph.vertex_count();
  LocalSets ls{std::vector<char>(nl, 0), std::vector<char>(nl, 0), zero_measure(nl)};
  for (int x = 0; x < nl; ++x)
    if (gv.to_global[x] >= n) ls.mu_tau[x] = rat_from_int64(g.edge(gv.to_global[x] - n).cap);
  for (int e : f) ls.x_f[gv.local(n + e)] = 1;
  for (int e : view.boundary_edges()) {
    int x = gv.local(n + e);
    ls.x_b[x] = 1;
    ls.mu_tau[x] *= tau;
  }
  return ls;
}

// Vertices of G'[S'] \ X_Y reachable from the marked start set.
std::vector<char> reach(const Graph& g, const std::vector<char>& start, const std::vector<char>& blocked) {
  std::vector<char> seen(g.vertex_count(), 0);
  std::deque<int> q;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (start[v] && !blocked[v]) {
      seen[v] = 1;
      q.push_back(v);
    }
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (const auto& inc : g.incident(v))
      if (!seen[inc.neighbor] && !blocked[inc.neighbor]) {
        seen[inc.neighbor] = 1;
        q.push_back(inc.neighbor);
      }
  }
  return seen;
}

// Rebuilds an edge flow on gv from paths over global ids and checks it.
struct PathCheck {
  Rational congestion = 0;
  Rational sink_ratio = 0;
  std::vector<std::string> failures;
};

PathCheck check_paths(const ClusterView& view, const ClusterView::View& gv, const std::vector<FlowPath>& paths,
                      const std::vector<char>& sources, const std::vector<char>& sinks, const Measure& mu_tau,
                      const Measure& sink_weight, const std::string& name) {
  const Graph& lg = gv.graph;
  int nl = lg.vertex_count();
  FlowNetwork net(lg);
  net.edge_scale = 2;
  FlowSolution sol;
  sol.edge_flow.assign(lg.edge_count(), 0);
  sol.source_flow = zero_measure(nl);
  sol.sink_flow = zero_measure(nl);
  PathCheck pc;
  for (int v = 0; v < nl; ++v) {
    if (sources[v]) net.source[v] = mu_tau[v];
    if (sinks[v]) net.sink[v] = 2 * sink_weight[v];
  }
  for (const auto& p : paths) {
    int first = gv.local(p.vertices.front()), last = gv.local(p.vertices.back());
    sol.source_flow[first] += p.amount;
    sol.sink_flow[last] += p.amount;
    sol.value += p.amount;
    for (size_t i = 0; i + 1 < p.vertices.size(); ++i) {
      int a = gv.local(p.vertices[i]), b = gv.local(p.vertices[i + 1]);
      auto e = lg.find_edge(a, b);
      if (!e) {
        pc.failures.push_back(name + ": path uses a non-edge");
        return pc;
      }
      sol.edge_flow[*e] += lg.edge(*e).u == a ? p.amount : Rational(-p.amount);
    }
  }
  std::string msg = check_flow(net, sol);
  if (!msg.empty()) pc.failures.push_back(name + ": " + msg);
  for (int v = 0; v < nl; ++v) {
    if (sources[v] && sol.source_flow[v] != mu_tau[v])
      pc.failures.push_back(name + ": separator node " + std::to_string(gv.to_global[v]) + " sends " +
                            to_string(sol.source_flow[v]) + " instead of " + to_string(mu_tau[v]));
    if (sinks[v] && sink_weight[v] > 0) {
      Rational r = sol.sink_flow[v] / sink_weight[v];
      if (r > pc.sink_ratio) pc.sink_ratio = r;
    }
  }
  pc.congestion = recompute_congestion(lg, sol.edge_flow);
  if (pc.congestion > 2) pc.failures.push_back(name + ": congestion above 2");
  (void)view;
  return pc;
}

}  // namespace

MergePartition merge_phase_2(const ClusterView& view, const BalancedClustering& clustering, const Rational& tau,
                             const MergeParams& params) {
  if (tau <= 0 || tau > 1) throw ArgumentError("merge_phase_2: tau must lie in (0, 1]");
  const Graph& g = view.base();
  int n = g.vertex_count();
  MergePartition part;
  part.clustering = clustering;
  part.tau = tau;
  ClusterView::View gv = view.subdivided();
  const Graph& lg = gv.graph;
  int nl = lg.vertex_count();
  LocalSets ls = local_sets(view, gv, clustering.f, tau);

  FlowNetwork net(lg);
  for (int x = 0; x < nl; ++x) {
    if (ls.x_f[x]) net.source[x] = ls.mu_tau[x];
    if (ls.x_b[x]) net.sink[x] = ls.mu_tau[x];
  }
  MaxFlowResult mf = fair_cut(net, 1);
  const auto& side = mf.source_side;

  std::vector<char> in_y(nl, 0);
  for (int x = 0; x < nl; ++x) {
    if (ls.x_f[x] && !side[x]) in_y[x] = 1;  // s -> x_f is cut
    if (ls.x_b[x] && side[x]) in_y[x] = 1;   // x_b -> t is cut
  }
  for (const Edge& ed : lg.edges()) {
    if (side[ed.u] == side[ed.v]) continue;
    in_y[gv.to_global[ed.u] >= n ? ed.u : ed.v] = 1;
  }
  for (int x = 0; x < nl; ++x)
    if (in_y[x]) {
      part.x_y.push_back(gv.to_global[x]);
      part.y.push_back(gv.to_global[x] - n);
    }
  std::sort(part.x_y.begin(), part.x_y.end());
  std::sort(part.y.begin(), part.y.end());

  // Each flow path crosses the min cut once; split it at its separator node.
  for (const auto& p : decompose_paths(mf.flow, net)) {
    const auto& vs = p.vertices;
    size_t cut_at = vs.size();
    if (!side[vs.front()]) {
      cut_at = 0;
    } else {
      for (size_t i = 0; i + 1 < vs.size(); ++i)
        if (side[vs[i]] && !side[vs[i + 1]]) {
          cut_at = gv.to_global[vs[i]] >= n ? i : i + 1;
          break;
        }
      if (cut_at == vs.size()) cut_at = vs.size() - 1;  // x_b -> t is cut
    }
    if (!in_y[vs[cut_at]]) throw ContractError("merge_phase_2: flow path crosses the cut outside X_Y");
    FlowPath to_b, to_f;
    to_b.amount = to_f.amount = p.amount;
    for (size_t i = cut_at; i < vs.size(); ++i) to_b.vertices.push_back(gv.to_global[vs[i]]);
    for (size_t i = cut_at + 1; i-- > 0;) to_f.vertices.push_back(gv.to_global[vs[i]]);
    part.to_b.push_back(std::move(to_b));
    part.to_f.push_back(std::move(to_f));
  }

  std::vector<char> start(nl, 0);
  for (int x = 0; x < nl; ++x) start[x] = ls.x_b[x];
  std::vector<char> reached = reach(lg, start, in_y);
  for (int v : view.members()) (reached[gv.local(v)] ? part.r : part.l).push_back(v);
  part.l_parts = pieces(view, clustering.z, part.l);
  part.r_parts = pieces(view, clustering.z, part.r);

  PathCheck cb = check_paths(view, gv, part.to_b, in_y, ls.x_b, ls.mu_tau, ls.mu_tau, "flow to X_B");
  PathCheck cf = check_paths(view, gv, part.to_f, in_y, ls.x_f, ls.mu_tau, ls.mu_tau, "flow to X_F");
  part.congestion_b = cb.congestion;
  part.congestion_f = cf.congestion;
  // Sinks of the X_B flow are measured per unit of capacity, so the cap 2 tau
  // reads as sink_b <= 2 tau.
  part.sink_b = cb.sink_ratio * tau;
  part.sink_f = cf.sink_ratio;
  if (params.verify) {
    part.failures = clustering.failures;
    part.failures.insert(part.failures.end(), cb.failures.begin(), cb.failures.end());
    part.failures.insert(part.failures.end(), cf.failures.begin(), cf.failures.end());
    for (const auto& m : check_partition(view, part)) part.failures.push_back(m);
  }
  return part;
}

MergePartition merge_phase(const ClusterView& view, const Rational& tau, const MergeParams& params) {
  if (view.size() < 2) throw ArgumentError("merge_phase: cluster must have at least two vertices");
  BalancedClustering c = merge_phase_1(view, params);
  return merge_phase_2(view, c, tau, params);
}

std::vector<std::string> check_partition(const ClusterView& view, const MergePartition& part) {
  std::vector<std::string> out;
  const Graph& g = view.base();
  int n = g.vertex_count();
  const VertexSet& s = view.members();
  if (set_union(part.l, part.r) != s || !set_intersection(part.l, part.r).empty())
    out.push_back("L and R do not partition S");
  int limit = balance_limit(view.size());
  for (const auto& z : part.clustering.z)
    if (static_cast<int>(z.size()) > limit) out.push_back("cluster Z above the balance limit");
  VertexSet all;
  for (const auto& c : part.children()) {
    if (3 * static_cast<int64_t>(c.size()) > 2 * static_cast<int64_t>(s.size()))
      out.push_back("sub-cluster of size " + std::to_string(c.size()) + " above 2/3 of " + std::to_string(s.size()));
    if (!set_intersection(all, c).empty()) out.push_back("sub-clusters overlap");
    all = set_union(all, c);
  }
  if (all != s) out.push_back("sub-clusters do not cover S");

  ClusterView::View gv = view.subdivided();
  const Graph& lg = gv.graph;
  int nl = lg.vertex_count();
  LocalSets ls = local_sets(view, gv, part.clustering.f, part.tau);
  std::vector<char> blocked(nl, 0);
  for (int x : part.x_y) blocked[gv.local(x)] = 1;
  // Everything reachable from X_F \ X_Y or from L must avoid X_B.
  std::vector<char> start = ls.x_f;
  for (int v : part.l) start[gv.local(v)] = 1;
  std::vector<char> seen = reach(lg, start, blocked);
  for (int x = 0; x < nl; ++x)
    if (seen[x] && ls.x_b[x]) {
      out.push_back("X_B node " + std::to_string(gv.to_global[x]) + " reachable from X_F or L outside X_Y");
      break;
    }
  // R is exactly what reaches X_B \ X_Y.
  std::vector<char> from_b = reach(lg, ls.x_b, blocked);
  for (int v : part.r)
    if (!from_b[gv.local(v)]) out.push_back("vertex " + std::to_string(v) + " in R does not reach X_B");
  for (int e : part.clustering.f) {
    if (blocked[gv.local(n + e)]) continue;
    const Edge& ed = g.edge(e);
    if (!contains(part.l, ed.u) || !contains(part.l, ed.v)) out.push_back("X_F node outside X_Y not inside L'");
  }
  return out;
}

json partition_json(const MergePartition& part) {
  json j;
  json z = json::array();
  for (const auto& zi : part.clustering.z) z.push_back(set_json(zi));
  j["z"] = z;
  j["f"] = part.clustering.f;
  j["f_tilde"] = part.clustering.f_tilde;
  j["alpha_bound"] = optional_json(part.clustering.alpha_bound);
  j["alpha_tilde"] = optional_json(part.clustering.alpha_tilde);
  j["alpha_measured"] = optional_json(part.clustering.alpha_measured);
  json hist = json::array();
  for (const auto& h : part.clustering.history)
    hist.push_back({{"case", case_name(h.oracle_case)}, {"from_case3", h.from_case3}, {"choice", h.choice},
                    {"before", h.before}, {"after", h.after}});
  j["shrink"] = hist;
  j["tau"] = rational_json(part.tau);
  j["l"] = set_json(part.l);
  j["r"] = set_json(part.r);
  j["y"] = part.y;
  auto paths = [](const std::vector<FlowPath>& ps) {
    json a = json::array();
    for (const auto& p : ps) a.push_back({{"path", p.vertices}, {"amount", rational_json(p.amount)}});
    return a;
  };
  j["to_b"] = paths(part.to_b);
  j["to_f"] = paths(part.to_f);
  j["congestion_b"] = rational_json(part.congestion_b);
  j["congestion_f"] = rational_json(part.congestion_f);
  return j;
}

}  // namespace treecut
