#include "treecut/charging.hpp"

#include "treecut/errors.hpp"

#include <algorithm>

namespace treecut {

LiftedCut LiftedCut::make(const Graph& g, const VertexSet& b) {
  int n = g.vertex_count();
  LiftedCut cut;
  cut.n = n;
  cut.b = make_set(b);
  for (int v : cut.b)
    if (v < 0 || v >= n) throw ArgumentError("cut vertex " + std::to_string(v) + " out of range");
  cut.side.assign(n + g.edge_count(), 0);
  for (int v : cut.b) cut.side[v] = 1;
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if (cut.side[ed.u] || cut.side[ed.v]) cut.side[n + e] = 1;
    if (cut.side[ed.u] != cut.side[ed.v]) cut.crossing.push_back(e);
  }
  return cut;
}

std::vector<int> crossing_in(const Graph& g, const LiftedCut& cut, const VertexSet& s) {
  std::vector<char> in = membership(g.vertex_count(), s);
  std::vector<int> out;
  for (int e : cut.crossing) {
    const Edge& ed = g.edge(e);
    int w = cut.side[ed.u] ? ed.v : ed.u;
    if (in[w]) out.push_back(e);
  }
  return out;
}

int64_t crossing_capacity(const Graph& g, const LiftedCut& cut, const VertexSet& s) {
  int64_t c = 0;
  for (int e : crossing_in(g, cut, s)) c += g.edge(e).cap;
  return c;
}

void ChargeLedger::apply(const Graph& g, const LiftedCut& cut, const ChargeEntry& entry) {
  entries.push_back(entry);
  if (entry.charge == 0) return;
  for (int e : crossing_in(g, cut, entry.scope)) {
    Rational& c = edge_charge[e];
    c += entry.charge;
    covered += entry.charge * rat_from_int64(g.edge(e).cap);
    if (c > max_charge) max_charge = c;
  }
}

namespace {

Rational cap_of(const Graph& g, int x) { return rat_from_int64(g.edge(x - g.vertex_count()).cap); }

std::string id_list(const VertexSet& s) {
  std::string out;
  for (size_t i = 0; i < s.size() && i < 8; ++i) out += (i ? "," : "") + std::to_string(s[i]);
  if (s.size() > 8) out += ",...";
  return "{" + out + "}";
}

// Applies q to p and checks that the difference is valid and that its demand
// across the lifted cut is bounded by the demand of q.
DemandState step(const std::string& name, const DemandState& p, const DemandMatrix& q, const LiftedCut& cut,
                 ReplayTrace& trace) {
  DemandState after = update(p, q);
  DemandState diff = p - after;
  if (!diff.valid()) throw ReplayError("step validity", name + ": the step difference is not a valid state");
  ReplayStep rs;
  rs.name = name;
  rs.q = q;
  rs.dem_diff = dem_across(diff, cut.side);
  rs.dem_q = dem_across(q, cut.side);
  if (rs.dem_diff > rs.dem_q)
    throw ReplayError("step demand", name + ": moved demand " + to_string(rs.dem_diff) + " exceeds " +
                                         to_string(rs.dem_q));
  rs.state = after;
  trace.steps.push_back(std::move(rs));
  return after;
}

void require_support(const DemandState& p, const std::vector<char>& allowed, const std::string& claim,
                     const std::string& what) {
  for (const auto& [v, row] : p.rows())
    if (v >= static_cast<int>(allowed.size()) || !allowed[v])
      throw ReplayError(claim, "mass left at " + std::to_string(v) + ", outside " + what);
}

// Weighted all-to-all on the marked split nodes: after the step every node x
// holds c(x) / total of the summed vector.
DemandMatrix spread_matrix(const Graph& g, const DemandState& p, const std::vector<int>& targets) {
  Rational total = 0;
  for (int x : targets) total += cap_of(g, x);
  DemandMatrix q;
  if (total == 0) return q;
  for (const auto& [u, row] : p.rows()) {
    Rational l = p.load(u);
    if (l == 0) continue;
    for (int v : targets)
      if (v != u) q.add(u, v, l * cap_of(g, v) / total);
  }
  return q;
}

void require_uniform(const Graph& g, const DemandState& spread, const DemandState::Row& sum,
                     const std::vector<int>& targets, const std::string& claim) {
  Rational total = 0;
  for (int x : targets) total += cap_of(g, x);
  for (int x : targets) {
    DemandState::Row want;
    for (const auto& [k, a] : sum) want[k] = a * cap_of(g, x) / total;
    const DemandState::Row* have = spread.row(x);
    DemandState::Row got = have ? *have : DemandState::Row{};
    if (got != want) throw ReplayError(claim, "node " + std::to_string(x) + " does not hold its share");
  }
}

std::map<int, std::vector<const FlowPath*>> paths_by_start(const std::vector<FlowPath>& paths) {
  std::map<int, std::vector<const FlowPath*>> out;
  for (const FlowPath& p : paths)
    if (!p.vertices.empty()) out[p.vertices.front()].push_back(&p);
  return out;
}

Rational dem_of_difference(const DemandState& a, const DemandState& b, const LiftedCut& cut) {
  DemandState d = a - b;
  if (!d.valid()) throw ReplayError("step validity", "cluster difference is not a valid state");
  return dem_across(d, cut.side);
}

ChargeEntry make_charge(const Graph& g, const LiftedCut& cut, const std::string& kind, const VertexSet& scope,
                        const Rational& dem) {
  ChargeEntry c;
  c.kind = kind;
  c.scope = scope;
  c.dem = dem;
  c.cap = crossing_capacity(g, cut, scope);
  if (c.cap == 0) {
    if (dem != 0)
      throw ReplayError("charge", kind + " on " + id_list(scope) + " moves demand " + to_string(dem) +
                                      " across the cut with no cut edge inside");
  } else {
    c.charge = dem / rat_from_int64(c.cap);
  }
  return c;
}

}  // namespace

ClusterReplay replay_merge_cluster(const Graph& g, const VertexSet& s, const std::vector<DemandState>& states,
                                   const MergePartition& part, const LiftedCut& cut, const Rational& alpha,
                                   const DemandState& original, const Rational& charge_c) {
  int n = g.vertex_count();
  int ids = n + g.edge_count();
  ClusterView view(g, s);
  std::vector<VertexSet> children = part.children();
  if (states.size() != children.size()) throw ArgumentError("replay_merge_cluster: one state per part expected");
  const Rational& tau = part.tau;

  std::vector<char> in_l = membership(n, part.l);
  DemandState pl, pr;
  for (size_t i = 0; i < children.size(); ++i) {
    InvariantResult r = invariant_check(states[i], ClusterView(g, children[i]), original, alpha);
    if (!r.ok) throw ReplayError("entry invariant", "part " + id_list(children[i]) + ": " + r.detail);
    if (in_l[children[i].front()]) pl = pl + states[i];
    else pr = pr + states[i];
  }
  DemandState before = pl + pr;

  std::vector<char> x_f(ids, 0), x_y(ids, 0), x_b(ids, 0), x_yt(ids, 0);
  std::vector<int> f_nodes, yt_nodes;
  for (int e : part.clustering.f) {
    x_f[n + e] = 1;
    f_nodes.push_back(n + e);
  }
  for (int x : part.x_y) x_y[x] = 1;
  for (int e : view.boundary_edges()) x_b[n + e] = 1;
  // Y minus the boundary edges at R.
  Rational cap_yt = 0;
  for (int e : part.y) {
    const Edge& ed = g.edge(e);
    bool boundary_at_r = x_b[n + e] && ((view.has(ed.u) && !in_l[ed.u]) || (view.has(ed.v) && !in_l[ed.v]));
    if (boundary_at_r) continue;
    x_yt[n + e] = 1;
    yt_nodes.push_back(n + e);
    cap_yt += rat_from_int64(ed.cap);
  }
  auto mu_tau = [&](int x) { return x_b[x] ? tau * cap_of(g, x) : cap_of(g, x); };

  ClusterReplay out;
  ReplayTrace trace;
  trace.cluster = s;

  // Step 1: core mass on X_Y goes to X_F along the separator flow.
  auto to_f = paths_by_start(part.to_f);
  DemandMatrix q1;
  for (int x : part.x_y) {
    Rational l = pl.load(x);
    if (l == 0) continue;
    if (l > 2 * alpha * cap_of(g, x))
      throw ReplayError("entry load", "node " + std::to_string(x) + " carries " + to_string(l));
    Rational sent = 0;
    for (const FlowPath* p : to_f[x]) {
      sent += p->amount;
      if (p->vertices.back() != x) q1.add(x, p->vertices.back(), l * p->amount / mu_tau(x));
    }
    if (sent != mu_tau(x))
      throw ReplayError("separator flow", "node " + std::to_string(x) + " sends " + to_string(sent) + " to X_F");
  }
  DemandState p2 = step("core to X_F", pl, q1, cut, trace);
  require_support(p2, x_f, "core support", "X_F");
  for (const auto& [x, row] : p2.rows())
    if (p2.load(x) > 6 * alpha / tau * cap_of(g, x))
      throw ReplayError("core load", "node " + std::to_string(x) + " holds " + to_string(p2.load(x)));

  // Step 2: weighted all-to-all on X_F.
  DemandState::Row core_sum = p2.commodity_sums();
  DemandState p3 = p2;
  if (!p2.empty()) {
    p3 = step("spread on X_F", p2, spread_matrix(g, p2, f_nodes), cut, trace);
    require_uniform(g, p3, core_sum, f_nodes, "uniform spread");
    Rational total = p3.total_load();
    Rational cap_l = rat_from_int64(cut_capacity(g, part.l));
    if (total > cap_l)
      throw ReplayError("core cut bound", "spread load " + to_string(total) + " above cap(L) " + to_string(cap_l));
    if (total > cap_yt)
      throw ReplayError("separator capacity bound",
                        "spread load " + to_string(total) + " above cap(Y~) " + to_string(cap_yt));
  }

  // Step 3: back to X_Y~, proportional to capacity.
  DemandState p4l = p3;
  if (!p3.empty()) {
    p4l = step("X_F to X_Y~", p3, spread_matrix(g, p3, yt_nodes), cut, trace);
    require_support(p4l, x_yt, "separator support", "X_Y~");
    for (const auto& [x, row] : p4l.rows())
      if (p4l.load(x) > cap_of(g, x))
        throw ReplayError("separator unit load", "node " + std::to_string(x) + " holds " + to_string(p4l.load(x)));
  }

  // Step 4: everything on X_Y \ X_B goes to X_B.
  DemandState p4 = p4l + pr;
  std::vector<char> allowed(ids, 0);
  for (int x = 0; x < ids; ++x) allowed[x] = x_b[x] || x_y[x];
  require_support(p4, allowed, "pre-boundary support", "X_B and X_Y");
  if (part.sink_b > 2 * tau) throw ReplayError("boundary sink cap", "flow to X_B delivers " + to_string(part.sink_b));
  auto to_b = paths_by_start(part.to_b);
  DemandMatrix q4;
  for (const auto& [x, row] : p4.rows()) {
    Rational l = p4.load(x);
    if (x_b[x]) {
      if (l > alpha * cap_of(g, x))
        throw ReplayError("boundary load", "node " + std::to_string(x) + " holds " + to_string(l));
      continue;
    }
    if (l > (2 * alpha + 1) * cap_of(g, x))
      throw ReplayError("separator load", "node " + std::to_string(x) + " holds " + to_string(l));
    Rational sent = 0;
    for (const FlowPath* p : to_b[x]) {
      sent += p->amount;
      q4.add(x, p->vertices.back(), l * p->amount / cap_of(g, x));
    }
    if (sent != cap_of(g, x))
      throw ReplayError("separator flow", "node " + std::to_string(x) + " sends " + to_string(sent) + " to X_B");
  }
  for (const auto& [key, a] : q4.entries)
    if (!x_b[key.second]) throw ReplayError("separator flow", "a path to X_B ends off the boundary");
  std::map<int, Rational> received;
  for (const auto& [key, a] : q4.entries) received[key.second] += a;
  for (const auto& [x, r] : received)
    if (r > 6 * alpha * tau * cap_of(g, x))
      throw ReplayError("boundary receive bound", "node " + std::to_string(x) + " receives " + to_string(r));
  DemandState p5 = step("X_Y to X_B", p4, q4, cut, trace);

  Rational alpha_out = alpha * (1 + charge_c * tau);
  InvariantResult r = invariant_check(p5, view, original, alpha_out);
  if (!r.ok) throw ReplayError("merge invariant", id_list(s) + ": " + r.detail);

  out.state = p5;
  out.alpha = alpha_out;
  out.charges.push_back(make_charge(g, cut, "merge", s, dem_of_difference(before, p5, cut)));
  out.traces.push_back(std::move(trace));
  return out;
}

ClusterReplay replay_improved_cluster(const Graph& g, const VertexSet& s, const std::vector<RefinedPart>& parts,
                                      const MergePartition& part, const LiftedCut& cut, const DemandState& original,
                                      const Rational& charge_c) {
  int n = g.vertex_count();
  std::vector<VertexSet> children = part.children();
  if (parts.size() != children.size()) throw ArgumentError("replay_improved_cluster: one entry per part expected");
  if (part.tau != 1) throw ArgumentError("replay_improved_cluster: the merge must use tau = 1");
  ClusterReplay out;
  std::vector<DemandState> merged(parts.size());
  Rational alpha = 1;

  for (size_t i = 0; i < parts.size(); ++i) {
    const RefinedPart& rp = parts[i];
    if (rp.set != children[i]) throw ArgumentError("replay_improved_cluster: part sets do not match");
    if (rp.leaves.size() != rp.states.size() || rp.leaves.size() != rp.alphas.size())
      throw ArgumentError("replay_improved_cluster: leaf data misaligned");
    if (rp.leaves.size() > 1 && !rp.routing) throw ArgumentError("replay_improved_cluster: routing missing");

    DemandState p2i;
    for (size_t j = 0; j < rp.leaves.size(); ++j) {
      const VertexSet& leaf = rp.leaves[j];
      ClusterView lv(g, leaf);
      InvariantResult r = invariant_check(rp.states[j], lv, original, rp.alphas[j]);
      if (!r.ok) throw ReplayError("entry invariant", "leaf " + id_list(leaf) + ": " + r.detail);
      std::vector<int> targets;
      for (int e : lv.boundary_edges()) targets.push_back(n + e);
      ReplayTrace trace;
      trace.cluster = leaf;
      DemandState spread = rp.states[j];
      if (!spread.empty()) {
        DemandState::Row sum = spread.commodity_sums();
        spread = step("uniformize", rp.states[j], spread_matrix(g, rp.states[j], targets), cut, trace);
        require_uniform(g, spread, sum, targets, "uniform spread");
        Rational total = spread.total_load();
        Rational cap_b = rat_from_int64(lv.boundary_capacity());
        if (total > cap_b)
          throw ReplayError("refinement boundary bound", id_list(leaf) + ": spread load " + to_string(total) +
                                                             " above cap " + to_string(cap_b));
      }
      out.charges.push_back(
          make_charge(g, cut, "uniformize", leaf, dem_of_difference(rp.states[j], spread, cut)));
      out.traces.push_back(std::move(trace));
      p2i = p2i + spread;
    }

    ClusterView pv(g, rp.set);
    std::vector<char> on_boundary(n + g.edge_count(), 0);
    for (int e : pv.boundary_edges()) on_boundary[n + e] = 1;
    DemandMatrix q;
    Rational alpha_i = 1;
    if (rp.routing) {
      std::map<int, std::vector<std::pair<int, Rational>>> rows;
      for (const auto& [key, a] : rp.routing->transfer.entries) rows[key.first].emplace_back(key.second, a);
      for (const auto& [x, row] : p2i.rows()) {
        if (on_boundary[x]) continue;
        Rational l = p2i.load(x);
        if (l > 2 * cap_of(g, x))
          throw ReplayError("inter-cluster load", "node " + std::to_string(x) + " holds " + to_string(l));
        Rational sent = 0;
        for (const auto& [dst, a] : rows[x]) {
          sent += a;
          q.add(x, dst, l * a / cap_of(g, x));
        }
        if (sent != cap_of(g, x))
          throw ReplayError("inter-cluster routing", "node " + std::to_string(x) + " routes " + to_string(sent));
      }
      alpha_i = 1 + 2 * rp.routing->max_load;
      if (rp.routing->envelope.size() > 1 && alpha_i > 1 + 2 * rp.routing->envelope[1])
        throw ReplayError("routing envelope", id_list(rp.set) + ": load " + to_string(rp.routing->max_load));
    }
    ReplayTrace trace;
    trace.cluster = rp.set;
    DemandState p3i = q.entries.empty() ? p2i : step("inter to boundary", p2i, q, cut, trace);
    InvariantResult r = invariant_check(p3i, pv, original, alpha_i);
    if (!r.ok) throw ReplayError("refined invariant", id_list(rp.set) + ": " + r.detail);
    out.charges.push_back(make_charge(g, cut, "inter-route", rp.set, dem_of_difference(p2i, p3i, cut)));
    out.traces.push_back(std::move(trace));
    merged[i] = p3i;
    alpha = std::max(alpha, alpha_i);
  }

  ClusterReplay m = replay_merge_cluster(g, s, merged, part, cut, alpha, original, charge_c);
  out.state = std::move(m.state);
  out.alpha = m.alpha;
  for (auto& c : m.charges) out.charges.push_back(std::move(c));
  for (auto& t : m.traces) out.traces.push_back(std::move(t));
  return out;
}

std::optional<Rational> tree_respect_ratio(const DecompositionTree& t, const DemandState& p) {
  Rational worst = 0;
  for (size_t i = 1; i < t.nodes.size(); ++i) {
    Rational d = dem_across(p, t.nodes[i].set);
    if (d == 0) continue;
    if (t.nodes[i].weight == 0) return std::nullopt;
    Rational r = d / rat_from_int64(t.nodes[i].weight);
    if (r > worst) worst = r;
  }
  return worst;
}

ReplayReport full_replay(const Graph& g, const DecompositionTree& t, const DemandState& p, const VertexSet& b,
                         const Config& config, bool keep_traces) {
  int n = g.vertex_count();
  if (t.n != n) throw InputError("tree has " + std::to_string(t.n) + " vertices, graph has " + std::to_string(n));
  for (const auto& [v, row] : p.rows())
    if (v < 0 || v >= n) throw InputError("demand at vertex " + std::to_string(v) + " outside the graph");
  if (!p.valid()) throw InputError("demand state is not valid");
  for (size_t i = 1; i < t.nodes.size(); ++i) {
    Rational d = dem_across(p, t.nodes[i].set);
    if (d > rat_from_int64(t.nodes[i].weight))
      throw InputError("demand state is not 1-respected by the tree: node " + std::to_string(i) + " carries " +
                       to_string(d) + " over weight " + std::to_string(t.nodes[i].weight));
  }

  LiftedCut cut = LiftedCut::make(g, b);
  ReplayReport rep;
  ChargeLedger& led = rep.ledger;
  Rational logn = graph_logn(n);
  Rational loglogn = loglog_approx(n);
  rep.envelope = t.mode == BuildMode::Basic ? logn * logn * logn : logn * logn * loglogn;

  std::vector<DemandState> state(t.nodes.size());
  std::vector<Rational> alpha(t.nodes.size(), Rational(1));
  std::vector<char> ready(t.nodes.size(), 0);
  std::map<int, DemandState> leaves = leaf_init(p, g);
  for (int v = 0; v < n; ++v) {
    int leaf = t.leaf_of(v);
    if (leaf < 0) throw InputError("vertex " + std::to_string(v) + " has no leaf");
    auto it = leaves.find(v);
    if (it != leaves.end()) state[leaf] = it->second;
    ready[leaf] = 1;
    led.active = led.active + state[leaf];
  }
  if (!led.active.valid()) throw ReplayError("active state valid", "initial state");
  led.dem_initial = dem_across(led.active, cut.side);
  led.dem_p = dem_across(p, cut.b);
  led.cut_capacity = cut_capacity(g, cut.b);
  if (led.dem_p > led.dem_initial + rat_from_int64(led.cut_capacity))
    throw ReplayError("initial lift", "dem_P " + to_string(led.dem_p) + " above lifted " +
                                          to_string(led.dem_initial) + " + cap " + std::to_string(led.cut_capacity));

  auto take = [&](int node) -> const DemandState& {
    if (!ready[node]) throw ReplayError("order", "node " + std::to_string(node) + " has no state yet");
    return state[node];
  };
  // Merge records are created parent first, so the reverse order is bottom up.
  for (size_t k = t.merges.size(); k-- > 0;) {
    const MergeRecord& m = t.merges[k];
    const VertexSet& s = t.nodes[m.node].set;
    DemandState before;
    ClusterReplay cr;
    if (t.mode == BuildMode::Basic) {
      std::vector<DemandState> in;
      Rational a = 1;
      for (int x : m.part_nodes) {
        in.push_back(take(x));
        a = std::max(a, alpha[x]);
        before = before + in.back();
      }
      cr = replay_merge_cluster(g, s, in, m.part, cut, a, p, config.charge_c);
    } else {
      std::vector<RefinedPart> parts;
      std::vector<VertexSet> children = m.part.children();
      for (size_t i = 0; i < m.part_nodes.size(); ++i) {
        RefinedPart rp;
        rp.set = children[i];
        int ref = i < m.refine.size() ? m.refine[i] : -1;
        std::vector<int> leaf_nodes = {m.part_nodes[i]};
        if (ref >= 0) {
          const RefineRecord& rr = t.refinements[ref];
          leaf_nodes = rr.leaf_nodes;
          rp.routing = &rr.routing;
        }
        for (int x : leaf_nodes) {
          rp.leaves.push_back(t.nodes[x].set);
          rp.states.push_back(take(x));
          rp.alphas.push_back(alpha[x]);
          before = before + state[x];
        }
        parts.push_back(std::move(rp));
      }
      cr = replay_improved_cluster(g, s, parts, m.part, cut, p, config.charge_c);
    }
    Rational dem_total = dem_of_difference(before, cr.state, cut);
    Rational charged = 0;
    for (const ChargeEntry& c : cr.charges) {
      charged += c.dem;
      led.apply(g, cut, c);
    }
    if (charged < dem_total)
      throw ReplayError("cluster charge", id_list(s) + ": charged " + to_string(charged) + " below " +
                                              to_string(dem_total));
    led.active = led.active - before + cr.state;
    if (!led.active.valid()) throw ReplayError("active state valid", "after " + id_list(s));
    state[m.node] = std::move(cr.state);
    alpha[m.node] = cr.alpha;
    ready[m.node] = 1;
    led.max_alpha = std::max(led.max_alpha, cr.alpha);
    ++led.steps;
    if (keep_traces)
      for (auto& tr : cr.traces) rep.traces.push_back(std::move(tr));
  }

  if (!led.active.empty()) throw ReplayError("final state zero", "mass left on the root boundary");
  if (led.covered < led.dem_initial)
    throw ReplayError("coverage", "charges cover " + to_string(led.covered) + " of " + to_string(led.dem_initial));
  if (led.covered + rat_from_int64(led.cut_capacity) < led.dem_p)
    throw ReplayError("coverage", "charges plus capacity below dem_P(B, W)");
  rep.pass = true;
  rep.message = "pass: max charge " + to_string(led.max_charge) + ", max load " + to_string(led.max_alpha);
  return rep;
}

json ledger_json(const Graph& g, const ReplayReport& r) {
  const ChargeLedger& led = r.ledger;
  json j;
  j["format_version"] = 1;
  j["pass"] = r.pass;
  j["message"] = r.message;
  j["dem_p"] = to_string(led.dem_p);
  j["dem_initial"] = to_string(led.dem_initial);
  j["cut_capacity"] = led.cut_capacity;
  j["covered"] = to_string(led.covered);
  j["max_charge"] = to_string(led.max_charge);
  j["max_load"] = to_string(led.max_alpha);
  j["envelope"] = to_string(r.envelope);
  j["steps"] = led.steps;
  json edges = json::array();
  for (const auto& [e, c] : led.edge_charge) {
    json x;
    x["edge"] = e;
    x["u"] = g.edge(e).u;
    x["v"] = g.edge(e).v;
    x["cap"] = g.edge(e).cap;
    x["charge"] = to_string(c);
    edges.push_back(x);
  }
  j["edges"] = edges;
  json entries = json::array();
  for (const ChargeEntry& c : led.entries) {
    if (c.dem == 0) continue;
    json x;
    x["kind"] = c.kind;
    x["scope"] = c.scope;
    x["dem"] = to_string(c.dem);
    x["cap"] = c.cap;
    x["charge"] = to_string(c.charge);
    entries.push_back(x);
  }
  j["clusters"] = entries;
  return j;
}

}  // namespace treecut
