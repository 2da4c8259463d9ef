#include "treecut/oracle.hpp"

#include "treecut/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>

namespace treecut {

namespace {

// Best prefix cut of the given vertex order.
std::optional<SparseCut> sweep(const Graph& g, const Measure& mu, const std::vector<int>& order) {
  int n = g.vertex_count();
  Rational total = measure_total(mu);
  std::vector<char> side(n, 0);
  int64_t cap = 0;
  Rational in = 0;
  std::optional<SparseCut> best;
  for (int i = 0; i + 1 < n; ++i) {
    int v = order[i];
    for (const auto& inc : g.incident(v)) cap += side[inc.neighbor] ? -g.edge(inc.edge).cap : g.edge(inc.edge).cap;
    side[v] = 1;
    in += mu[v];
    Rational m = std::min(in, Rational(total - in));
    if (m <= 0) continue;
    Rational r = rat_from_int64(cap) / m;
    if (!best || r < best->value) best = SparseCut{from_membership(side), r, false};
  }
  return best;
}

std::vector<int> spectral_order(const Graph& g, const Eigen::VectorXd& weight) {
  int n = g.vertex_count();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    double c = static_cast<double>(e.cap);
    lap(e.u, e.v) -= c;
    lap(e.v, e.u) -= c;
    lap(e.u, e.u) += c;
    lap(e.v, e.v) += c;
  }
  Eigen::MatrixXd w = weight.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(lap, w);
  Eigen::VectorXd x = es.eigenvectors().col(n > 1 ? 1 : 0);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x(a) < x(b); });
  return order;
}

std::optional<SparseCut> spectral_cut(const Graph& g, const Measure& mu) {
  int n = g.vertex_count();
  if (n < 2) return std::nullopt;
  double total = to_double(measure_total(mu));
  double eps = std::max(1e-9, 1e-3 * total / n);
  Eigen::VectorXd by_degree(n), by_measure(n);
  for (int v = 0; v < n; ++v) {
    by_degree(v) = static_cast<double>(g.degree(v)) + eps;
    by_measure(v) = to_double(mu[v]) + eps;
  }
  std::optional<SparseCut> best;
  for (const auto* w : {&by_degree, &by_measure}) {
    auto c = sweep(g, mu, spectral_order(g, *w));
    if (c && (!best || c->value < best->value)) best = c;
  }
  return best;
}

Measure local_measure(const Measure& mu, const VertexSet& s) {
  Measure m(s.size());
  for (size_t i = 0; i < s.size(); ++i) m[i] = mu[s[i]];
  return m;
}

VertexSet lift(const Subgraph& sub, const VertexSet& local) {
  VertexSet out;
  for (int v : local) out.push_back(sub.to_parent[v]);
  return make_set(out);
}

// cap(side, container\side) / min of the two measures, inside G[container].
std::optional<Rational> sparsity_within(const Graph& g, const VertexSet& container, const VertexSet& side,
                                        const Measure& mu) {
  VertexSet rest = set_minus(container, side);
  Rational m = std::min(measure_of(mu, side), measure_of(mu, rest));
  if (side.empty() || rest.empty() || m <= 0) return std::nullopt;
  return rat_from_int64(capacity(g, side, rest)) / m;
}

std::vector<int> edges_between(const Graph& g, const VertexSet& a, const VertexSet& b) {
  auto ma = membership(g.vertex_count(), a), mb = membership(g.vertex_count(), b);
  std::vector<int> out;
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if ((ma[ed.u] && mb[ed.v]) || (ma[ed.v] && mb[ed.u])) out.push_back(e);
  }
  return out;
}

// Flow in G[d] from the edges between d and other.
RouteResult route_into(const Graph& g, const VertexSet& d, const VertexSet& other, const Measure& sinks,
                       const Rational& congestion) {
  return route_from_cut(g, d, edges_between(g, d, other), sinks, congestion);
}

Measure sink_caps(const Measure& mu, const OracleParams& p) {
  Measure s(mu.size());
  Rational f = p.sink_factor * p.threshold_ratio();
  for (size_t v = 0; v < mu.size(); ++v) s[v] = f * mu[v];
  return s;
}

// Smaller measure, then fewer vertices, then lexicographically first.
VertexSet pick_peel(const VertexSet& container, const VertexSet& side, const Measure& mu) {
  VertexSet other = set_minus(container, side);
  Rational a = measure_of(mu, side), b = measure_of(mu, other);
  if (a != b) return a < b ? side : other;
  if (side.size() != other.size()) return side.size() < other.size() ? side : other;
  return side < other ? side : other;
}

}  // namespace

std::optional<SparseCut> try_sparsest_cut(const Graph& g, const Measure& mu, int threshold) {
  try {
    auto r = min_ratio_cut(g, mu, RatioKind::Expansion, threshold);
    if (!r.value) return std::nullopt;
    return SparseCut{r.side, *r.value, true};
  } catch (const SizeError&) {
    return spectral_cut(g, mu);
  }
}

SparseCut sparsest_cut(const Graph& g, const Measure& mu, int threshold) {
  auto r = try_sparsest_cut(g, mu, threshold);
  if (!r) throw ContractError("no cut has positive measure on both sides; expansion undefined");
  return *r;
}

std::string case_name(OracleCase c) {
  switch (c) {
    case OracleCase::Expander: return "1";
    case OracleCase::BalancedCut: return "2";
    case OracleCase::UnbalancedExpander: return "3";
  }
  return "?";
}

std::string case_name(RefinedCase c) {
  switch (c) {
    case RefinedCase::C1: return "1";
    case RefinedCase::C2a: return "2a";
    case RefinedCase::C2b: return "2b";
    case RefinedCase::C2c: return "2c";
    case RefinedCase::C3a: return "3a";
    case RefinedCase::C3b: return "3b";
  }
  return "?";
}

OracleOutcome cut_or_expander(const Graph& g, const Measure& mu, const OracleParams& params) {
  if (params.phi <= 0) throw ArgumentError("phi must be positive");
  int n = g.vertex_count();
  if (static_cast<int>(mu.size()) != n) throw ArgumentError("measure does not match the graph");
  OracleOutcome o;
  o.params = params;
  Rational total = measure_total(mu);
  Rational theta = params.threshold_ratio();
  Measure sinks = sink_caps(mu, params);
  VertexSet a = all_vertices(n), a_bar;
  bool balanced = false;
  for (int guard = 0;; ++guard) {
    if (guard > 2 * n + 2) throw ContractError("peeling did not terminate");
    if (!o.peels.empty() && 4 * measure_of(mu, a_bar) >= total) {
      balanced = true;
      break;
    }
    if (a.empty()) {
      balanced = true;  // exhausted; reported as a degenerate Case 2
      break;
    }
    Subgraph sub = induced(g, a);
    auto sc = try_sparsest_cut(sub.graph, local_measure(mu, a), params.threshold);
    if (!sc || sc->value >= theta) {
      o.certificate = sc ? std::optional<Rational>(sc->value) : std::nullopt;
      o.certificate_exact = !sc || sc->exact;
      if (o.peels.empty() || !params.flows) break;
      auto into = route_into(g, a, a_bar, sinks, params.congestion);
      if (into.feasible) {
        o.into_a = std::move(into);
        break;
      }
      // Trim the part of A that cannot absorb its share and keep peeling.
      PeelStep st;
      st.peeled = into.certificate;
      st.residual = set_minus(a, st.peeled);
      st.sparsity = sparsity_within(g, a, st.peeled, mu);
      st.trim = true;
      o.peels.push_back(std::move(st));
      ++o.trims;
      a = o.peels.back().residual;
      a_bar = set_union(a_bar, o.peels.back().peeled);
      continue;
    }
    PeelStep st;
    st.peeled = pick_peel(a, lift(sub, sc->side), mu);
    st.residual = set_minus(a, st.peeled);
    st.sparsity = sc->value;
    o.peels.push_back(std::move(st));
    a = o.peels.back().residual;
    a_bar = set_union(a_bar, o.peels.back().peeled);
  }
  o.a = a;
  o.a_bar = a_bar;
  if (o.peels.empty()) {
    o.tag = OracleCase::Expander;
    return o;
  }
  o.tag = balanced ? OracleCase::BalancedCut : OracleCase::UnbalancedExpander;
  if (balanced) o.certificate.reset();
  o.cut_sparsity = cut_expansion(g, a, mu);
  if (!balanced && params.promote_small && measure_of(mu, a_bar) * params.logn > total) {
    o.tag = OracleCase::BalancedCut;
    o.from_case3 = true;
  }
  if (params.flows) {
    for (auto& st : o.peels) {
      st.into_peeled = route_into(g, st.peeled, st.residual, sinks, params.congestion);
      st.into_residual = route_into(g, st.residual, st.peeled, sinks, params.congestion);
    }
    o.into_a_bar = route_into(g, a_bar, a, sinks, params.congestion);
  }
  return o;
}

VertexSet RefinedOutcome::left() const {
  int n = static_cast<int>(base.a.size() + base.a_bar.size());
  switch (tag) {
    case RefinedCase::C2a:
    case RefinedCase::C2b:
    case RefinedCase::C3b: return set_minus(all_vertices(n), a);
    case RefinedCase::C2c: return set_minus(all_vertices(n), a);
    case RefinedCase::C3a: return a;
    default: return {};
  }
}

RefinedOutcome refined_cut_or_expander(const Graph& g, const Measure& mu, const Measure& nu,
                                       const OracleParams& params) {
  OracleParams p = params;
  p.promote_small = false;
  int n = g.vertex_count();
  if (static_cast<int>(nu.size()) != n) throw ArgumentError("second measure does not match the graph");
  RefinedOutcome r;
  r.base = cut_or_expander(g, mu, p);
  const OracleOutcome& b = r.base;
  Rational nu_total = measure_total(nu);
  Measure sinks = sink_caps(mu, p);
  VertexSet all = all_vertices(n);
  auto flow_into = [&](const VertexSet& d, const VertexSet& other) {
    return p.flows ? route_into(g, d, other, sinks, p.congestion) : RouteResult{};
  };
  if (b.tag == OracleCase::Expander) {
    r.tag = RefinedCase::C1;
    r.a = all;
    return r;
  }
  if (b.tag == OracleCase::BalancedCut) {
    if (4 * measure_of(nu, b.a_bar) <= nu_total) {
      r.tag = RefinedCase::C2a;
      r.a = b.a;
    } else {
      size_t t0 = 0;
      VertexSet prefix;  // union of S_t for t < t0
      for (; t0 < b.peels.size(); ++t0) {
        VertexSet next = set_union(prefix, b.peels[t0].peeled);
        if (4 * measure_of(nu, next) > nu_total) break;
        prefix = next;
      }
      if (t0 == b.peels.size()) throw ContractError("peel sequence does not reach a quarter of nu");
      VertexSet upto = set_union(prefix, b.peels[t0].peeled);
      if (2 * measure_of(nu, upto) <= nu_total) {
        r.tag = RefinedCase::C2b;
        r.a = set_minus(all, upto);
      } else {
        r.tag = RefinedCase::C2c;
        r.a = set_minus(all, prefix);
        r.a2 = b.peels[t0].residual;
      }
    }
  } else {
    r.tag = 2 * measure_of(nu, b.a_bar) >= nu_total ? RefinedCase::C3a : RefinedCase::C3b;
    r.a = b.a;
  }
  VertexSet rest = set_minus(all, r.a);
  r.sparsity = cut_expansion(g, r.a, mu);
  switch (r.tag) {
    case RefinedCase::C2a:
    case RefinedCase::C2b: r.flow = flow_into(rest, r.a); break;
    case RefinedCase::C2c: {
      VertexSet mid = set_minus(r.a, r.a2);
      r.flow = flow_into(rest, r.a);
      r.flow2 = flow_into(r.a2, mid);
      r.sparsity2 = sparsity_within(g, r.a, r.a2, mu);
      break;
    }
    case RefinedCase::C3a: r.flow = flow_into(r.a, rest); break;
    case RefinedCase::C3b:
      r.flow = flow_into(rest, r.a);
      r.flow2 = flow_into(r.a, rest);
      break;
    default: break;
  }
  return r;
}

namespace {

struct Checker {
  const Graph& g;
  const Measure& mu;
  const OracleParams& p;
  std::vector<std::string> out;

  void fail(const std::string& m) { out.push_back(m); }

  void route(const std::string& what, const VertexSet& d, const VertexSet& other, const RouteResult& r) {
    if (!p.flows) return;
    if (!r.feasible) {
      fail(what + ": flow infeasible");
      return;
    }
    int n = g.vertex_count();
    const FlowSolution& f = r.flow;
    if (static_cast<int>(f.edge_flow.size()) != g.edge_count()) {
      fail(what + ": flow missing");
      return;
    }
    auto in_d = membership(n, d), in_o = membership(n, other);
    Measure excess(n, 0);
    Rational cap_factor = p.sink_factor * p.threshold_ratio();
    for (int v = 0; v < n; ++v) {
      int64_t want = 0;
      if (in_d[v])
        for (const auto& inc : g.incident(v))
          if (in_o[inc.neighbor]) want += g.edge(inc.edge).cap;
      if (f.source_flow[v] != want) fail(what + ": vertex " + std::to_string(v) + " sources the wrong amount");
      if (f.sink_flow[v] < 0 || f.sink_flow[v] > cap_factor * mu[v])
        fail(what + ": vertex " + std::to_string(v) + " receives more than its cap");
      if (!in_d[v] && (f.sink_flow[v] != 0 || f.source_flow[v] != 0)) fail(what + ": terminal outside the side");
      excess[v] = f.source_flow[v] - f.sink_flow[v];
    }
    for (int e = 0; e < g.edge_count(); ++e) {
      const Edge& ed = g.edge(e);
      if (f.edge_flow[e] == 0) continue;
      if (!in_d[ed.u] || !in_d[ed.v]) fail(what + ": flow leaves the side");
      if (abs(f.edge_flow[e]) > p.congestion * ed.cap) fail(what + ": congestion above the cap");
      excess[ed.u] -= f.edge_flow[e];
      excess[ed.v] += f.edge_flow[e];
    }
    for (int v = 0; v < n; ++v)
      if (excess[v] != 0) {
        fail(what + ": flow not conserved");
        break;
      }
  }

  void expander(const std::string& what, const VertexSet& a) {
    Subgraph sub = induced(g, a);
    try {
      auto phi = graph_expansion_exact(sub.graph, local_measure(mu, a), p.threshold);
      if (phi && *phi < p.phi) fail(what + ": expansion " + to_string(*phi) + " below phi");
    } catch (const SizeError&) {
      // Above the enumeration range the certificate is the sweep's; nothing exact to check.
    }
  }

  void sparse(const std::string& what, const std::optional<Rational>& recorded, const std::optional<Rational>& actual) {
    if (recorded != actual) fail(what + ": recorded sparsity differs from recomputation");
    if (actual && *actual > p.c_sparse * p.threshold_ratio()) fail(what + ": cut not sparse");
  }
};

}  // namespace

std::vector<std::string> check_outcome(const Graph& g, const Measure& mu, const OracleOutcome& o) {
  Checker c{g, mu, o.params, {}};
  int n = g.vertex_count();
  VertexSet all = all_vertices(n);
  Rational total = measure_total(mu);
  Rational theta = o.params.threshold_ratio();
  if (set_union(o.a, o.a_bar) != all || !set_intersection(o.a, o.a_bar).empty()) c.fail("A and A-bar do not partition V");
  VertexSet cur = all, peeled_union;
  for (size_t t = 0; t < o.peels.size(); ++t) {
    const auto& st = o.peels[t];
    std::string tag = "peel " + std::to_string(t);
    if (st.peeled.empty() || set_minus(st.peeled, cur).size() > 0) c.fail(tag + ": not a nonempty subset of A_t");
    if (st.residual != set_minus(cur, st.peeled)) c.fail(tag + ": residual is not A_t minus S_t");
    auto actual = sparsity_within(g, cur, st.peeled, mu);
    if (actual != st.sparsity) c.fail(tag + ": recorded sparsity differs");
    if (!st.trim) {
      if (!actual || *actual >= theta) c.fail(tag + ": peeled cut is not sparse");
      c.route(tag + " into S_t", st.peeled, st.residual, st.into_peeled);
      c.route(tag + " into A_t+1", st.residual, st.peeled, st.into_residual);
    }
    peeled_union = set_union(peeled_union, st.peeled);
    cur = st.residual;
  }
  if (cur != o.a || peeled_union != o.a_bar) c.fail("peel sequence does not telescope to the cut");
  Rational ma = measure_of(mu, o.a), mb = measure_of(mu, o.a_bar);
  switch (o.tag) {
    case OracleCase::Expander:
      if (!o.peels.empty()) c.fail("case 1 with peels");
      c.expander("case 1", all);
      break;
    case OracleCase::BalancedCut: {
      c.sparse("case 2", o.cut_sparsity, cut_expansion(g, o.a, mu));
      Rational lower = std::min(rat(1, 4), Rational(1 / o.params.logn)) * total;
      if (4 * ma < total) c.fail("case 2: mu(A) below mu(V)/4");
      if (mb < lower) c.fail("case 2: mu(A-bar) too small");
      if (o.from_case3 && mb * o.params.logn <= total) c.fail("case 2 from case 3 without the balance");
      c.route("case 2 into A-bar", o.a_bar, o.a, o.into_a_bar);
      break;
    }
    case OracleCase::UnbalancedExpander:
      c.sparse("case 3", o.cut_sparsity, cut_expansion(g, o.a, mu));
      if (mb <= 0 || 2 * mb > total) c.fail("case 3: mu(A-bar) out of range");
      if (o.params.promote_small && mb * o.params.logn > total) c.fail("case 3: mu(A-bar) above mu(V)/log n");
      if (4 * ma < total) c.fail("case 3: mu(A) below mu(V)/4");
      c.expander("case 3 G[A]", o.a);
      c.route("case 3 into A", o.a, o.a_bar, o.into_a);
      c.route("case 3 into A-bar", o.a_bar, o.a, o.into_a_bar);
      break;
  }
  return c.out;
}

std::vector<std::string> check_refined(const Graph& g, const Measure& mu, const Measure& nu, const RefinedOutcome& o) {
  auto out = check_outcome(g, mu, o.base);
  Checker c{g, mu, o.base.params, {}};
  int n = g.vertex_count();
  VertexSet all = all_vertices(n);
  Rational total = measure_total(mu), nt = measure_total(nu);
  VertexSet rest = set_minus(all, o.a);
  Rational nrest = measure_of(nu, rest);
  const Rational& logn = o.base.params.logn;
  switch (o.tag) {
    case RefinedCase::C1:
      if (o.base.tag != OracleCase::Expander) c.fail("refined case 1 without a case 1 base");
      break;
    case RefinedCase::C2a:
      c.sparse("2a", o.sparsity, cut_expansion(g, o.a, mu));
      if (4 * nrest > nt) c.fail("2a: nu(V\\A) above nu(V)/4");
      if (measure_of(mu, rest) < std::min(rat(1, 4), Rational(1 / logn)) * total) c.fail("2a: mu(V\\A) too small");
      c.route("2a flow", rest, o.a, o.flow);
      break;
    case RefinedCase::C2b:
      c.sparse("2b", o.sparsity, cut_expansion(g, o.a, mu));
      if (4 * nrest < nt || 2 * nrest > nt) c.fail("2b: nu(V\\A) outside [1/4, 1/2]");
      c.route("2b flow", rest, o.a, o.flow);
      break;
    case RefinedCase::C2c: {
      c.sparse("2c outer", o.sparsity, cut_expansion(g, o.a, mu));
      c.sparse("2c inner", o.sparsity2, sparsity_within(g, o.a, o.a2, mu));
      VertexSet mid = set_minus(o.a, o.a2);
      if (mid.empty() || o.a2.empty() || set_minus(o.a2, o.a).size() > 0) c.fail("2c: A2 is not a proper part of A1");
      if (4 * measure_of(mu, o.a2) < total) c.fail("2c: mu(A2) below mu(V)/4");
      if (4 * measure_of(nu, mid) < nt) c.fail("2c: nu(A1\\A2) below nu(V)/4");
      c.route("2c flow", rest, o.a, o.flow);
      c.route("2c flow into A2", o.a2, mid, o.flow2);
      break;
    }
    case RefinedCase::C3a:
      c.sparse("3a", o.sparsity, cut_expansion(g, o.a, mu));
      if (measure_of(mu, rest) <= 0 || 2 * measure_of(mu, rest) > total) c.fail("3a: mu(V\\A) out of range");
      if (2 * nrest < nt) c.fail("3a: nu(V\\A) below nu(V)/2");
      c.route("3a flow", o.a, rest, o.flow);
      break;
    case RefinedCase::C3b:
      c.sparse("3b", o.sparsity, cut_expansion(g, o.a, mu));
      if (2 * nrest > nt) c.fail("3b: nu(V\\A) above nu(V)/2");
      c.expander("3b G[A]", o.a);
      c.route("3b flow", rest, o.a, o.flow);
      c.route("3b flow into A", o.a, rest, o.flow2);
      break;
  }
  out.insert(out.end(), c.out.begin(), c.out.end());
  return out;
}

namespace {

json route_json(const Graph& g, const RouteResult& r) {
  json j;
  j["feasible"] = r.feasible;
  j["value"] = rational_json(r.flow.value);
  j["edges"] = flow_json(g, r.flow);
  if (!r.feasible) j["certificate"] = set_json(r.certificate);
  return j;
}

}  // namespace

json outcome_json(const Graph& g, const OracleOutcome& o) {
  json j;
  j["case"] = case_name(o.tag);
  j["from_case3"] = o.from_case3;
  j["phi"] = rational_json(o.params.phi);
  j["log_n"] = rational_json(o.params.logn);
  j["A"] = set_json(o.a);
  j["A_bar"] = set_json(o.a_bar);
  j["cut_sparsity"] = optional_json(o.cut_sparsity);
  j["certificate"] = optional_json(o.certificate);
  j["certificate_exact"] = o.certificate_exact;
  j["trims"] = o.trims;
  json peels = json::array();
  for (const auto& st : o.peels) {
    json s;
    s["S"] = set_json(st.peeled);
    s["sparsity"] = optional_json(st.sparsity);
    s["trim"] = st.trim;
    if (o.params.flows) {
      s["into_S"] = route_json(g, st.into_peeled);
      s["into_rest"] = route_json(g, st.into_residual);
    }
    peels.push_back(s);
  }
  j["peels"] = peels;
  if (o.params.flows && o.tag != OracleCase::Expander) {
    j["into_A_bar"] = route_json(g, o.into_a_bar);
    if (o.tag == OracleCase::UnbalancedExpander || o.from_case3) j["into_A"] = route_json(g, o.into_a);
  }
  return j;
}

json refined_json(const Graph& g, const RefinedOutcome& o) {
  json j;
  j["case"] = case_name(o.tag);
  j["A"] = set_json(o.a);
  if (o.tag == RefinedCase::C2c) j["A2"] = set_json(o.a2);
  j["sparsity"] = optional_json(o.sparsity);
  if (o.tag == RefinedCase::C2c) j["sparsity2"] = optional_json(o.sparsity2);
  if (o.tag != RefinedCase::C1 && o.base.params.flows) {
    j["flow"] = route_json(g, o.flow);
    if (o.tag == RefinedCase::C2c || o.tag == RefinedCase::C3b) j["flow2"] = route_json(g, o.flow2);
  }
  j["base"] = outcome_json(g, o.base);
  return j;
}

}  // namespace treecut
