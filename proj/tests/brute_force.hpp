#pragma once

// Reference implementations by plain enumeration. They share no code with the
// library beyond the Graph container and are used as independent oracles.

#include "treecut/graph.hpp"

#include <optional>
#include <random>

namespace brute {

using treecut::Graph;
using treecut::Measure;
using treecut::Rational;

inline int64_t cut_cap(const Graph& g, uint64_t mask) {
  int64_t c = 0;
  for (const auto& e : g.edges())
    if (((mask >> e.u) & 1) != ((mask >> e.v) & 1)) c += e.cap;
  return c;
}

inline Rational side_mass(const Measure& mu, uint64_t mask, bool in) {
  Rational t = 0;
  for (size_t v = 0; v < mu.size(); ++v)
    if ((((mask >> v) & 1) != 0) == in) t += mu[v];
  return t;
}

// min over cuts of cap / min(mu(S), mu(S^c)).
inline std::optional<Rational> expansion(const Graph& g, const Measure& mu) {
  int n = g.vertex_count();
  std::optional<Rational> best;
  for (uint64_t mask = 1; mask + 1 < (uint64_t{1} << n); ++mask) {
    Rational a = side_mass(mu, mask, true), b = side_mass(mu, mask, false);
    Rational m = a < b ? a : b;
    if (m <= 0) continue;
    Rational r = Rational(cut_cap(g, mask)) / m;
    if (!best || r < *best) best = r;
  }
  return best;
}

// min over cuts of cap / (2 w(S) w(S^c) / w(V)).
inline std::optional<Rational> all_to_all(const Graph& g, const Measure& w) {
  int n = g.vertex_count();
  Rational total = 0;
  for (const auto& x : w) total += x;
  std::optional<Rational> best;
  for (uint64_t mask = 1; mask + 1 < (uint64_t{1} << n); ++mask) {
    Rational a = side_mass(w, mask, true), b = side_mass(w, mask, false);
    if (a <= 0 || b <= 0) continue;
    Rational r = Rational(cut_cap(g, mask)) * total / (2 * a * b);
    if (!best || r < *best) best = r;
  }
  return best;
}

inline Measure random_measure(int n, std::mt19937_64& rng, int max_w = 3, double zero_p = 0.3) {
  Measure mu(n);
  std::uniform_real_distribution<double> coin(0, 1);
  std::uniform_int_distribution<int> w(1, max_w);
  for (int v = 0; v < n; ++v) mu[v] = coin(rng) < zero_p ? 0 : w(rng);
  return mu;
}

// Minimum s-t cut of a network given by per-vertex source/sink capacities,
// over all 2^n choices of the source side.
inline Rational network_min_cut(const Graph& g, const Measure& src, const Measure& snk,
                                const Rational& scale = 1) {
  int n = g.vertex_count();
  std::optional<Rational> best;
  for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
    Rational c = scale * cut_cap(g, mask);
    for (int v = 0; v < n; ++v) c += ((mask >> v) & 1) ? snk[v] : src[v];
    if (!best || c < *best) best = c;
  }
  return *best;
}

// Cheapest set of tree edges separating the leaves marked in side from the
// other leaves, over all subsets of tree edges. parent[0] = -1 and parent[i] < i;
// leaf_vertex[i] is the vertex at a leaf or -1; edge i joins i to parent[i].
inline int64_t tree_cut(const std::vector<int>& parent, const std::vector<int64_t>& weight,
                        const std::vector<int>& leaf_vertex, uint64_t side) {
  int count = static_cast<int>(parent.size());
  int edges = count - 1;
  int64_t best = -1;
  for (uint64_t mask = 0; mask < (uint64_t{1} << edges); ++mask) {
    std::vector<int> comp(count);
    int64_t w = 0;
    for (int i = 0; i < count; ++i) {
      bool cut = i > 0 && ((mask >> (i - 1)) & 1);
      if (cut) w += weight[i];
      comp[i] = (i == 0 || cut) ? i : comp[parent[i]];
    }
    std::vector<int> seen(count, -1);
    bool ok = true;
    for (int i = 0; i < count && ok; ++i) {
      if (leaf_vertex[i] < 0) continue;
      int s = (side >> leaf_vertex[i]) & 1;
      int& c = seen[comp[i]];
      if (c == -1) c = s;
      else if (c != s) ok = false;
    }
    if (ok && (best < 0 || w < best)) best = w;
  }
  return best;
}

}  // namespace brute
