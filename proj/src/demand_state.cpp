#include "treecut/demand_state.hpp"

#include "treecut/errors.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace treecut {

Rational DemandState::get(int v, int k) const {
  auto it = rows_.find(v);
  if (it == rows_.end()) return 0;
  auto jt = it->second.find(k);
  return jt == it->second.end() ? Rational(0) : jt->second;
}

void DemandState::add(int v, int k, const Rational& x) {
  if (x == 0) return;
  Row& r = rows_[v];
  Rational& y = r[k];
  y += x;
  if (y == 0) {
    r.erase(k);
    if (r.empty()) rows_.erase(v);
  }
}

void DemandState::add_row(int v, const Row& row, const Rational& scale) {
  if (scale == 0) return;
  for (const auto& [k, x] : row) add(v, k, x * scale);
}

const DemandState::Row* DemandState::row(int v) const {
  auto it = rows_.find(v);
  return it == rows_.end() ? nullptr : &it->second;
}

Rational DemandState::load(int v) const {
  Rational t = 0;
  if (const Row* r = row(v))
    for (const auto& [k, x] : *r) t += abs(x);
  return t;
}

Rational DemandState::total_load() const {
  Rational t = 0;
  for (const auto& [v, r] : rows_)
    for (const auto& [k, x] : r) t += abs(x);
  return t;
}

std::vector<int> DemandState::vertices() const {
  std::vector<int> out;
  for (const auto& [v, r] : rows_) out.push_back(v);
  return out;
}

std::vector<int> DemandState::commodities() const {
  std::set<int> ks;
  for (const auto& [v, r] : rows_)
    for (const auto& [k, x] : r) ks.insert(k);
  return {ks.begin(), ks.end()};
}

DemandState::Row DemandState::commodity_sums() const {
  Row s;
  for (const auto& [v, r] : rows_)
    for (const auto& [k, x] : r) s[k] += x;
  for (auto it = s.begin(); it != s.end();) it = it->second == 0 ? s.erase(it) : std::next(it);
  return s;
}

DemandState::Row DemandState::commodity_sums(const VertexSet& set) const {
  Row s;
  for (int v : set)
    if (const Row* r = row(v))
      for (const auto& [k, x] : *r) s[k] += x;
  for (auto it = s.begin(); it != s.end();) it = it->second == 0 ? s.erase(it) : std::next(it);
  return s;
}

bool DemandState::valid() const { return commodity_sums().empty(); }

DemandState DemandState::operator+(const DemandState& o) const {
  DemandState r = *this;
  for (const auto& [v, row] : o.rows_) r.add_row(v, row);
  return r;
}

DemandState DemandState::operator-(const DemandState& o) const {
  DemandState r = *this;
  for (const auto& [v, row] : o.rows_) r.add_row(v, row, -1);
  return r;
}

DemandState DemandState::scaled(const Rational& c) const {
  DemandState r;
  for (const auto& [v, row] : rows_) r.add_row(v, row, c);
  return r;
}

DemandState DemandState::restricted(const VertexSet& s) const {
  DemandState r;
  for (int v : s)
    if (const Row* row = this->row(v)) r.rows_[v] = *row;
  return r;
}

DemandState from_matrix(const DemandMatrix& q) {
  DemandState p;
  for (const auto& [key, x] : q.entries) {
    auto [u, v] = key;
    if (x < 0) throw ArgumentError("demand matrix entry is negative");
    if (u == v) continue;
    p.add(u, u, x);
    p.add(v, u, -x);
  }
  return p;
}

namespace {

bool in_side(const std::vector<char>& side, int v) {
  return v >= 0 && v < static_cast<int>(side.size()) && side[v];
}

}  // namespace

Rational dem_across(const DemandState& p, const std::vector<char>& side) {
  if (!p.valid()) throw ContractError("demand across a cut of an invalid demand state");
  std::map<int, Rational> sums;
  for (const auto& [v, r] : p.rows())
    if (in_side(side, v))
      for (const auto& [k, x] : r) sums[k] += x;
  Rational t = 0;
  for (const auto& [k, x] : sums) t += abs(x);
  return t;
}

Rational dem_across(const DemandState& p, const VertexSet& side) {
  int hi = side.empty() ? 0 : side.back() + 1;
  return dem_across(p, membership(hi, side));
}

Rational dem_across(const DemandMatrix& q, const std::vector<char>& side) {
  Rational t = 0;
  for (const auto& [key, x] : q.entries)
    if (in_side(side, key.first) != in_side(side, key.second)) t += x;
  return t;
}

namespace {

// Incremental cut demand over a Gray code walk.
struct CutDemand {
  std::vector<std::vector<std::pair<int, Rational>>> by_vertex;  // (commodity idx, mass)
  std::vector<Rational> sums;
  Rational total = 0;

  CutDemand(const DemandState& p, int n) : by_vertex(n) {
    std::map<int, int> idx;
    for (const auto& [v, r] : p.rows()) {
      if (v < 0 || v >= n) throw ArgumentError("demand state has a vertex outside the graph");
      for (const auto& [k, x] : r) {
        auto it = idx.emplace(k, static_cast<int>(idx.size())).first;
        by_vertex[v].push_back({it->second, x});
      }
    }
    sums.assign(idx.size(), 0);
  }

  void flip(int v, bool into) {
    for (const auto& [k, x] : by_vertex[v]) {
      total -= abs(sums[k]);
      if (into)
        sums[k] += x;
      else
        sums[k] -= x;
      total += abs(sums[k]);
    }
  }
};

void consider(RespectResult& best, int64_t cap, const Rational& dem, const std::vector<char>& side) {
  if (dem <= 0) return;
  Rational r = rat_from_int64(cap) / dem;
  if (!best.ratio || r < *best.ratio) {
    best.ratio = r;
    best.argmin = from_membership(side);
  }
}

}  // namespace

RespectResult respects_exact(const Graph& g, const DemandState& p, int threshold) {
  if (!p.valid()) throw ContractError("respect ratio of an invalid demand state");
  int n = g.vertex_count();
  if (n > threshold)
    throw SizeError("respects_exact limited to " + std::to_string(threshold) + " vertices; use sampling");
  RespectResult best;
  if (n < 2) return best;
  CutDemand cd(p, n);
  std::vector<char> side(n, 0);
  int64_t cap = 0;
  // Vertex n-1 stays outside; Gray code over the rest.
  uint64_t limit = uint64_t{1} << (n - 1);
  for (uint64_t i = 1; i < limit; ++i) {
    int v = __builtin_ctzll(i);
    bool into = !side[v];
    for (const auto& inc : g.incident(v)) {
      int64_t c = g.edge(inc.edge).cap;
      cap += (side[inc.neighbor] == into) ? -c : c;
    }
    side[v] = into;
    cd.flip(v, into);
    consider(best, cap, cd.total, side);
  }
  return best;
}

RespectResult respects_sampled(const Graph& g, const DemandState& p, int samples, std::mt19937_64& rng,
                               const std::vector<VertexSet>& extra) {
  if (!p.valid()) throw ContractError("respect ratio of an invalid demand state");
  int n = g.vertex_count();
  RespectResult best;
  auto eval = [&](const std::vector<char>& side) {
    consider(best, cut_capacity(g, side), dem_across(p, side), side);
  };
  for (int v = 0; v < n; ++v) {
    std::vector<char> side(n, 0);
    side[v] = 1;
    eval(side);
  }
  for (const auto& s : extra) eval(membership(n, s));
  for (int i = 0; i < samples; ++i) {
    std::vector<char> side(n);
    for (int v = 0; v < n; ++v) side[v] = static_cast<char>(rng() & 1);
    eval(side);
  }
  return best;
}

DemandState update(const DemandState& p, const DemandMatrix& q) {
  std::map<int, Rational> out, norm;
  for (const auto& [key, x] : q.entries) {
    if (x < 0) throw ArgumentError("demand matrix entry is negative");
    out[key.first] += x;
  }
  for (const auto& [u, o] : out) {
    if (o == 0) continue;
    Rational l = p.load(u);
    if (l == 0) throw ContractError("update sends from vertex " + std::to_string(u) + " with zero load");
    norm[u] = l;
  }
  DemandState r = p;
  for (const auto& [u, o] : out) {
    if (o == 0) continue;
    r.add_row(u, *p.row(u), -o / norm[u]);
  }
  for (const auto& [key, x] : q.entries) {
    if (x == 0) continue;
    auto [v, u] = key;
    r.add_row(u, *p.row(v), x / norm[v]);
  }
  return r;
}

std::map<int, DemandState> leaf_init(const DemandState& p, const Graph& g) {
  int n = g.vertex_count();
  std::map<int, DemandState> out;
  for (const auto& [v, row] : p.rows()) {
    if (v < 0 || v >= n) throw ArgumentError("demand state vertex outside the graph");
    Rational deg = rat_from_int64(g.degree(v));
    if (p.load(v) > deg)
      throw ContractError("load at vertex " + std::to_string(v) + " exceeds its degree");
    DemandState s;
    for (const auto& inc : g.incident(v)) s.add_row(n + inc.edge, row, rat_from_int64(g.edge(inc.edge).cap) / deg);
    out[v] = std::move(s);
  }
  for (int v = 0; v < n; ++v) out.try_emplace(v);
  return out;
}

InvariantResult invariant_check(const DemandState& p, const ClusterView& cluster,
                                const DemandState& original, const Rational& alpha) {
  const Graph& g = cluster.base();
  int n = g.vertex_count();
  std::map<int, int64_t> boundary;  // split id -> capacity
  for (int e : cluster.boundary_edges()) boundary[n + e] = g.edge(e).cap;
  InvariantResult res;
  for (const auto& [v, row] : p.rows())
    if (!boundary.count(v)) {
      res = {false, 1, "mass at " + std::to_string(v) + " which is not a boundary split node"};
      return res;
    }
  auto have = p.commodity_sums();
  auto want = original.commodity_sums(cluster.members());
  if (have != want) {
    res = {false, 2, "per-commodity totals differ from the original state on the cluster"};
    return res;
  }
  for (const auto& [v, row] : p.rows()) {
    Rational l = p.load(v);
    if (l > alpha * boundary[v]) {
      res = {false, 3, "load " + to_string(l) + " at " + std::to_string(v) + " exceeds " +
                           to_string(Rational(alpha * boundary[v]))};
      return res;
    }
  }
  return res;
}

DemandState random_state(int n, std::mt19937_64& rng, int entries, int max_amount) {
  DemandMatrix q;
  if (n < 2) return {};
  for (int i = 0; i < entries; ++i) {
    int u = static_cast<int>(rng() % n), v = static_cast<int>(rng() % n);
    if (u == v) continue;
    q.add(u, v, rat(static_cast<long>(rng() % max_amount + 1), static_cast<long>(rng() % 3 + 1)));
  }
  return from_matrix(q);
}

void write_state(std::ostream& out, const DemandState& p) {
  for (const auto& [v, row] : p.rows())
    for (const auto& [k, x] : row) out << v << ' ' << k << ' ' << x.get_num() << ' ' << x.get_den() << '\n';
}

DemandState read_state(std::istream& in, const std::string& name) {
  DemandState p;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long v, k;
    std::string num, den;
    if (!(ls >> v)) continue;
    if (!(ls >> k >> num >> den))
      throw InputError(name + ":" + std::to_string(lineno) + ": expected 'vertex commodity numerator denominator'");
    std::string rest;
    if (ls >> rest) throw InputError(name + ":" + std::to_string(lineno) + ": trailing text");
    if (v < 0 || k < 0) throw InputError(name + ":" + std::to_string(lineno) + ": negative id");
    Rational x;
    try {
      x = parse_rational(num + "/" + den);
    } catch (const std::exception&) {
      throw InputError(name + ":" + std::to_string(lineno) + ": bad number");
    }
    p.add(static_cast<int>(v), static_cast<int>(k), x);
  }
  return p;
}

DemandState read_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_state(in, path);
}

}  // namespace treecut
