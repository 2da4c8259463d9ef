#include "treecut/graph.hpp"

#include "treecut/errors.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace treecut {

Graph::Graph(int n) : adj_(n) {}

int Graph::add_vertex() {
  adj_.emplace_back();
  return vertex_count() - 1;
}

uint64_t Graph::key(int u, int v) {
  if (u > v) std::swap(u, v);
  return (static_cast<uint64_t>(u) << 32) | static_cast<uint32_t>(v);
}

int Graph::add_edge(int u, int v, int64_t cap) {
  if (u < 0 || v < 0 || u >= vertex_count() || v >= vertex_count())
    throw ArgumentError("edge endpoint out of range: " + std::to_string(u) + " " + std::to_string(v));
  if (u == v) throw ArgumentError("self-loop at vertex " + std::to_string(u));
  if (cap < 1) throw ArgumentError("edge capacity must be a positive integer");
  auto it = index_.find(key(u, v));
  if (it != index_.end()) {
    edges_[it->second].cap += cap;
    return it->second;
  }
  int id = edge_count();
  edges_.push_back({u, v, cap});
  adj_[u].push_back({v, id});
  adj_[v].push_back({u, id});
  index_.emplace(key(u, v), id);
  return id;
}

int64_t Graph::degree(int v) const {
  int64_t d = 0;
  for (const auto& inc : adj_[v]) d += edges_[inc.edge].cap;
  return d;
}

int64_t Graph::total_capacity() const {
  int64_t t = 0;
  for (const auto& e : edges_) t += e.cap;
  return t;
}

std::optional<int> Graph::find_edge(int u, int v) const {
  auto it = index_.find(key(u, v));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VertexSet make_set(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

VertexSet all_vertices(int n) {
  VertexSet s(n);
  for (int i = 0; i < n; ++i) s[i] = i;
  return s;
}

VertexSet set_minus(const VertexSet& a, const VertexSet& b) {
  VertexSet r;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

VertexSet set_union(const VertexSet& a, const VertexSet& b) {
  VertexSet r;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

VertexSet set_intersection(const VertexSet& a, const VertexSet& b) {
  VertexSet r;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

bool contains(const VertexSet& s, int v) { return std::binary_search(s.begin(), s.end(), v); }

std::vector<char> membership(int n, const VertexSet& s) {
  std::vector<char> m(n, 0);
  for (int v : s) m[v] = 1;
  return m;
}

VertexSet from_membership(const std::vector<char>& mask) {
  VertexSet s;
  for (int i = 0; i < static_cast<int>(mask.size()); ++i)
    if (mask[i]) s.push_back(i);
  return s;
}

int64_t capacity(const Graph& g, const VertexSet& a, const VertexSet& b) {
  if (!set_intersection(a, b).empty()) throw ArgumentError("capacity: vertex sets overlap");
  auto ma = membership(g.vertex_count(), a);
  auto mb = membership(g.vertex_count(), b);
  int64_t c = 0;
  for (const auto& e : g.edges())
    if ((ma[e.u] && mb[e.v]) || (ma[e.v] && mb[e.u])) c += e.cap;
  return c;
}

int64_t cut_capacity(const Graph& g, const std::vector<char>& side) {
  int64_t c = 0;
  for (const auto& e : g.edges())
    if ((side[e.u] != 0) != (side[e.v] != 0)) c += e.cap;
  return c;
}

int64_t cut_capacity(const Graph& g, const VertexSet& side) {
  return cut_capacity(g, membership(g.vertex_count(), side));
}

Measure zero_measure(int n) { return Measure(n, Rational(0)); }
Measure unit_measure(int n) { return Measure(n, Rational(1)); }

Measure indicator(int n, const VertexSet& s) {
  Measure mu = zero_measure(n);
  for (int v : s) mu[v] = 1;
  return mu;
}

Rational measure_of(const Measure& mu, const VertexSet& s) {
  Rational t = 0;
  for (int v : s) t += mu[v];
  return t;
}

Rational measure_total(const Measure& mu) {
  Rational t = 0;
  for (const auto& w : mu) t += w;
  return t;
}

Measure restrict_measure(const Measure& mu, const VertexSet& s) {
  Measure r = zero_measure(static_cast<int>(mu.size()));
  for (int v : s) r[v] = mu[v];
  return r;
}

std::optional<Rational> cut_expansion(const Graph& g, const VertexSet& side, const Measure& mu) {
  auto mask = membership(g.vertex_count(), side);
  Rational in = 0, out = 0;
  for (int v = 0; v < g.vertex_count(); ++v) (mask[v] ? in : out) += mu[v];
  Rational m = in < out ? in : out;
  if (m <= 0) return std::nullopt;
  return rat_from_int64(cut_capacity(g, mask)) / m;
}

Subgraph induced(const Graph& g, const VertexSet& s) {
  Subgraph sub;
  sub.graph = Graph(static_cast<int>(s.size()));
  sub.to_parent = s;
  sub.from_parent.assign(g.vertex_count(), -1);
  for (int i = 0; i < static_cast<int>(s.size()); ++i) sub.from_parent[s[i]] = i;
  for (int e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edge(e);
    int a = sub.from_parent[ed.u], b = sub.from_parent[ed.v];
    if (a >= 0 && b >= 0) {
      sub.graph.add_edge(a, b, ed.cap);
      sub.edge_to_parent.push_back(e);
    }
  }
  return sub;
}

SubdivisionGraph subdivide(const Graph& g) {
  SubdivisionGraph sd;
  sd.base_vertices = g.vertex_count();
  sd.graph = Graph(g.vertex_count() + g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edge(e);
    sd.graph.add_edge(ed.u, sd.split_of(e), ed.cap);
    sd.graph.add_edge(sd.split_of(e), ed.v, ed.cap);
  }
  return sd;
}

ClusterView::ClusterView(const Graph& g, VertexSet s) : g_(&g), s_(make_set(std::move(s))) {
  mask_ = membership(g.vertex_count(), s_);
  for (int e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edge(e);
    bool a = mask_[ed.u], b = mask_[ed.v];
    if (a && b) internal_.push_back(e);
    else if (a || b) boundary_.push_back(e);
  }
}

int64_t ClusterView::boundary_capacity() const {
  int64_t c = 0;
  for (int e : boundary_) c += g_->edge(e).cap;
  return c;
}

std::vector<int64_t> ClusterView::boundary_degree() const {
  std::vector<int64_t> d(s_.size(), 0);
  for (int e : boundary_) {
    const auto& ed = g_->edge(e);
    int inside = mask_[ed.u] ? ed.u : ed.v;
    auto pos = std::lower_bound(s_.begin(), s_.end(), inside) - s_.begin();
    d[pos] += ed.cap;
  }
  return d;
}

int ClusterView::View::local(int global_id) const {
  auto it = from_global.find(global_id);
  if (it == from_global.end()) throw ArgumentError("vertex " + std::to_string(global_id) + " not in view");
  return it->second;
}

namespace {

ClusterView::View make_view(const Graph& g, const VertexSet& s, const std::vector<int>& internal,
                            const std::vector<int>& boundary, const std::vector<char>& mask,
                            bool interior_split, bool boundary_split) {
  ClusterView::View view;
  int n = g.vertex_count();
  auto add = [&](int global) {
    int id = view.graph.add_vertex();
    view.to_global.push_back(global);
    view.from_global.emplace(global, id);
    return id;
  };
  for (int v : s) add(v);
  for (int e : internal) {
    const auto& ed = g.edge(e);
    int a = view.from_global[ed.u], b = view.from_global[ed.v];
    if (interior_split) {
      int x = add(n + e);
      view.graph.add_edge(a, x, ed.cap);
      view.graph.add_edge(x, b, ed.cap);
    } else {
      view.graph.add_edge(a, b, ed.cap);
    }
  }
  if (boundary_split) {
    for (int e : boundary) {
      const auto& ed = g.edge(e);
      int inside = mask[ed.u] ? ed.u : ed.v;
      int x = add(n + e);
      view.graph.add_edge(view.from_global[inside], x, ed.cap);
    }
  }
  return view;
}

}  // namespace

ClusterView::View ClusterView::induced_view() const {
  return make_view(*g_, s_, internal_, boundary_, mask_, false, false);
}
ClusterView::View ClusterView::subdivided_induced() const {
  return make_view(*g_, s_, internal_, boundary_, mask_, true, false);
}
ClusterView::View ClusterView::subdivided() const {
  return make_view(*g_, s_, internal_, boundary_, mask_, true, true);
}
ClusterView::View ClusterView::tilde() const {
  return make_view(*g_, s_, internal_, boundary_, mask_, false, true);
}

std::vector<VertexSet> components(const Graph& g, const VertexSet& s) {
  auto mask = membership(g.vertex_count(), s);
  std::vector<char> seen(g.vertex_count(), 0);
  std::vector<VertexSet> out;
  for (int start : s) {
    if (seen[start]) continue;
    VertexSet comp;
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (const auto& inc : g.incident(v)) {
        if (mask[inc.neighbor] && !seen[inc.neighbor]) {
          seen[inc.neighbor] = 1;
          stack.push_back(inc.neighbor);
        }
      }
    }
    out.push_back(make_set(std::move(comp)));
  }
  return out;
}

bool is_connected(const Graph& g, const VertexSet& s) { return components(g, s).size() <= 1; }

namespace {

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

[[noreturn]] void bad_line(const std::string& name, int line, const std::string& what) {
  throw InputError(name + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Graph read_edge_list(std::istream& in, const std::string& name) {
  struct Row {
    long long u, v, c;
  };
  std::vector<Row> rows;
  long long declared = -1;
  long long max_id = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    {
      std::istringstream hs(line);
      std::string hash, word;
      long long count;
      if (hs >> hash >> word >> count && hash == "#" && word == "vertices") {
        declared = count;
        continue;
      }
    }
    std::istringstream ls(strip_comment(line));
    long long u, v, c;
    if (!(ls >> u)) continue;
    if (!(ls >> v >> c)) bad_line(name, lineno, "expected 'u v cap'");
    std::string rest;
    if (ls >> rest) bad_line(name, lineno, "trailing text '" + rest + "'");
    if (u < 0 || v < 0) bad_line(name, lineno, "negative vertex id");
    if (u == v) bad_line(name, lineno, "self-loop");
    if (c < 1) bad_line(name, lineno, "capacity must be a positive integer");
    rows.push_back({u, v, c});
    max_id = std::max({max_id, u, v});
  }
  long long n = std::max(declared, max_id + 1);
  if (declared >= 0 && max_id >= declared) throw InputError(name + ": vertex id exceeds declared count");
  Graph g(static_cast<int>(std::max(n, 0LL)));
  for (const auto& r : rows) g.add_edge(static_cast<int>(r.u), static_cast<int>(r.v), r.c);
  return g;
}

Graph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_edge_list(in, path);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# vertices " << g.vertex_count() << "\n";
  for (const auto& e : g.edges()) out << e.u << " " << e.v << " " << e.cap << "\n";
}

Measure read_measure(std::istream& in, int n, const std::string& name) {
  Measure mu = zero_measure(n);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(strip_comment(line));
    long long v;
    std::string w;
    if (!(ls >> v)) continue;
    if (!(ls >> w)) bad_line(name, lineno, "expected 'v weight'");
    if (v < 0 || v >= n) bad_line(name, lineno, "vertex out of range");
    Rational q;
    try {
      q = parse_rational(w);
    } catch (const InputError& e) {
      bad_line(name, lineno, e.what());
    }
    if (q < 0) bad_line(name, lineno, "negative weight");
    mu[v] = q;
  }
  return mu;
}

Measure read_measure_file(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_measure(in, n, path);
}

}  // namespace treecut
