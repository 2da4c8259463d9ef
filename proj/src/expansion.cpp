#include "treecut/expansion.hpp"

#include "treecut/errors.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace treecut {

namespace {

using i128 = __int128;
constexpr int64_t kInf = std::numeric_limits<int64_t>::max() / 4;
constexpr int64_t kMaxScaledMass = 1 << 22;

struct ScaledMeasure {
  std::vector<int64_t> w;
  int64_t total = 0;
  mpz_class scale;  // real weight = w / scale
};

ScaledMeasure scale_measure(const Measure& mu) {
  ScaledMeasure s;
  s.scale = 1;
  for (const auto& q : mu) {
    if (q < 0) throw ArgumentError("measure has a negative weight");
    mpz_lcm(s.scale.get_mpz_t(), s.scale.get_mpz_t(), q.get_den_mpz_t());
  }
  s.w.resize(mu.size());
  mpz_class total = 0;
  for (size_t i = 0; i < mu.size(); ++i) {
    mpz_class v = mu[i].get_num() * (s.scale / mu[i].get_den());
    total += v;
    if (!v.fits_slong_p() || total > kMaxScaledMass)
      throw SizeError("measure too fine-grained for exact enumeration");
    s.w[i] = v.get_si();
  }
  s.total = total.get_si();
  return s;
}

struct Item {
  int vertex;
  int64_t weight;
  std::vector<std::pair<int, int64_t>> core_nbrs;  // (core index, cap)
};

struct Engine {
  const Graph& g;
  RatioKind kind;
  ScaledMeasure sm;
  std::vector<int> core;
  std::vector<int> core_index;  // vertex -> index in core or -1
  std::vector<Item> weighted, weightless;
  std::vector<std::vector<std::pair<int, int64_t>>> core_core;  // per core vertex
  std::vector<std::vector<std::pair<int, int64_t>>> core_item;  // (item id, cap); item id < 0 encodes weightless ~id
  int64_t item_weight = 0;

  Engine(const Graph& graph, const Measure& mu, RatioKind k, int threshold)
      : g(graph), kind(k), sm(scale_measure(mu)) {
    int n = g.vertex_count();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      size_t da = g.incident(a).size(), db = g.incident(b).size();
      if (da != db) return da < db;
      return a > b;
    });
    std::vector<char> free_v(n, 0), blocked(n, 0);
    for (int v : order) {
      if (blocked[v]) continue;
      free_v[v] = 1;
      for (const auto& inc : g.incident(v)) blocked[inc.neighbor] = 1;
    }
    core_index.assign(n, -1);
    for (int v = 0; v < n; ++v)
      if (!free_v[v]) core_index[v] = static_cast<int>(core.size()), core.push_back(v);
    if (core.empty() && n > 0) {
      free_v[0] = 0;
      core_index[0] = 0;
      core.push_back(0);
    }
    if (static_cast<int>(core.size()) > threshold)
      throw SizeError("exact cut enumeration needs a core of " + std::to_string(core.size()) +
                      " vertices, above the threshold " + std::to_string(threshold) +
                      "; use sampled mode");
    core_core.resize(core.size());
    core_item.resize(core.size());
    for (int v = 0; v < n; ++v) {
      if (core_index[v] >= 0) {
        for (const auto& inc : g.incident(v)) {
          int ci = core_index[inc.neighbor];
          if (ci >= 0) core_core[core_index[v]].push_back({ci, g.edge(inc.edge).cap});
        }
        continue;
      }
      Item it{v, sm.w[v], {}};
      for (const auto& inc : g.incident(v))
        it.core_nbrs.push_back({core_index[inc.neighbor], g.edge(inc.edge).cap});
      if (it.weight > 0) {
        int id = static_cast<int>(weighted.size());
        for (auto [ci, c] : it.core_nbrs) core_item[ci].push_back({id, c});
        item_weight += it.weight;
        weighted.push_back(std::move(it));
      } else {
        int id = static_cast<int>(weightless.size());
        for (auto [ci, c] : it.core_nbrs) core_item[ci].push_back({~id, c});
        weightless.push_back(std::move(it));
      }
    }
  }

  // Denominator in scaled units; zero means the cut is not admissible.
  i128 denominator(int64_t m1) const {
    int64_t m2 = sm.total - m1;
    if (m1 <= 0 || m2 <= 0) return 0;
    if (kind == RatioKind::Expansion) return std::min(m1, m2);
    return static_cast<i128>(m1) * m2;
  }

  i128 max_denominator() const {
    int64_t h = sm.total / 2;
    if (kind == RatioKind::Expansion) return h;
    return static_cast<i128>(h) * (sm.total - h);
  }

  struct State {
    std::vector<char> side;
    int64_t core_cost = 0;
    int64_t mass1 = 0;
    std::vector<int64_t> c0, c1;    // weighted items: cost on side 0 / side 1
    std::vector<int64_t> z0, z1;    // weightless items
  };

  State initial_state() const {
    State s;
    s.side.assign(core.size(), 0);
    s.c0.assign(weighted.size(), 0);
    s.c1.resize(weighted.size());
    s.z0.assign(weightless.size(), 0);
    s.z1.resize(weightless.size());
    for (size_t i = 0; i < weighted.size(); ++i) {
      int64_t d = 0;
      for (auto [ci, c] : weighted[i].core_nbrs) d += c;
      s.c1[i] = d;
    }
    for (size_t i = 0; i < weightless.size(); ++i) {
      int64_t d = 0;
      for (auto [ci, c] : weightless[i].core_nbrs) d += c;
      s.z1[i] = d;
    }
    return s;
  }

  void flip(State& s, int i) const {
    bool was1 = s.side[i] != 0;
    for (auto [j, c] : core_core[i]) s.core_cost += (s.side[j] == s.side[i]) ? c : -c;
    for (auto [id, c] : core_item[i]) {
      auto& a = id >= 0 ? s.c0[id] : s.z0[~id];
      auto& b = id >= 0 ? s.c1[id] : s.z1[~id];
      if (!was1) {
        b -= c;
        a += c;
      } else {
        a -= c;
        b += c;
      }
    }
    s.mass1 += was1 ? -sm.w[core[i]] : sm.w[core[i]];
    s.side[i] ^= 1;
  }

  int64_t weightless_cost(const State& s) const {
    int64_t t = 0;
    for (size_t i = 0; i < weightless.size(); ++i) t += std::min(s.z0[i], s.z1[i]);
    return t;
  }

  void run_dp(const State& s, std::vector<int64_t>& dp, std::vector<std::vector<char>>* choice) const {
    dp.assign(item_weight + 1, kInf);
    dp[0] = 0;
    int64_t hi = 0;
    if (choice) choice->assign(weighted.size(), {});
    for (size_t t = 0; t < weighted.size(); ++t) {
      int64_t w = weighted[t].weight, a = s.c0[t], b = s.c1[t];
      if (choice) (*choice)[t].assign(item_weight + 1, 0);
      for (int64_t m = hi + w; m >= 0; --m) {
        int64_t v0 = (m <= hi && dp[m] < kInf) ? dp[m] + a : kInf;
        int64_t v1 = (m >= w && dp[m - w] < kInf) ? dp[m - w] + b : kInf;
        if (v1 < v0) {
          dp[m] = v1;
          if (choice) (*choice)[t][m] = 1;
        } else {
          dp[m] = v0;
        }
      }
      hi += w;
    }
  }

  RatioCut solve() {
    RatioCut out;
    if (core.empty()) return out;
    int k = static_cast<int>(core.size());
    State s = initial_state();
    bool have = false;
    int64_t best_cost = 0;
    i128 best_den = 1;
    uint64_t best_gray = 0;
    int64_t best_m = 0;
    i128 max_den = max_denominator();
    if (max_den <= 0) return out;
    std::vector<int64_t> dp;
    uint64_t count = k >= 1 ? (uint64_t{1} << (k - 1)) : 1;
    uint64_t gray = 0;
    for (uint64_t i = 0; i < count; ++i) {
      if (i > 0) {
        int bit = __builtin_ctzll(i);
        flip(s, bit + 1);
        gray ^= uint64_t{1} << bit;
      }
      int64_t base = s.core_cost + weightless_cost(s);
      if (have && static_cast<i128>(base) * best_den >= static_cast<i128>(best_cost) * max_den) continue;
      run_dp(s, dp, nullptr);
      for (int64_t m = 0; m <= item_weight; ++m) {
        if (dp[m] >= kInf) continue;
        i128 den = denominator(s.mass1 + m);
        if (den <= 0) continue;
        int64_t cost = base + dp[m];
        if (!have || static_cast<i128>(cost) * best_den < static_cast<i128>(best_cost) * den) {
          have = true;
          best_cost = cost;
          best_den = den;
          best_gray = gray;
          best_m = m;
        }
      }
    }
    if (!have) return out;

    State b = initial_state();
    for (int bit = 0; bit + 1 < k; ++bit)
      if (best_gray & (uint64_t{1} << bit)) flip(b, bit + 1);
    std::vector<std::vector<char>> choice;
    run_dp(b, dp, &choice);
    std::vector<char> side(g.vertex_count(), 0);
    for (int i = 0; i < k; ++i) side[core[i]] = b.side[i];
    int64_t m = best_m;
    for (int t = static_cast<int>(weighted.size()) - 1; t >= 0; --t) {
      if (choice[t][m]) {
        side[weighted[t].vertex] = 1;
        m -= weighted[t].weight;
      }
    }
    for (size_t i = 0; i < weightless.size(); ++i) side[weightless[i].vertex] = b.z1[i] < b.z0[i] ? 1 : 0;
    out.side = from_membership(side);

    Rational cost = rat_from_int64(best_cost);
    Rational scale(sm.scale);
    if (kind == RatioKind::Expansion) {
      out.value = cost * scale / rat_from_int64(static_cast<int64_t>(best_den));
    } else {
      int64_t m1 = 0;
      for (int v : out.side) m1 += sm.w[v];
      Rational den = rat_from_int64(2) * rat_from_int64(m1) * rat_from_int64(sm.total - m1);
      out.value = cost * scale * rat_from_int64(sm.total) / den;
    }
    return out;
  }
};

}  // namespace

RatioCut min_ratio_cut(const Graph& g, const Measure& mu, RatioKind kind, int threshold) {
  if (static_cast<int>(mu.size()) != g.vertex_count()) throw ArgumentError("measure size mismatch");
  Engine eng(g, mu, kind, threshold);
  return eng.solve();
}

std::optional<Rational> graph_expansion_exact(const Graph& g, const Measure& mu, int threshold) {
  return min_ratio_cut(g, mu, RatioKind::Expansion, threshold).value;
}

ExpandsResult set_expands_exact(const Graph& g, const VertexSet& a, const Measure& mu,
                                const Rational& alpha, int threshold) {
  ExpandsResult r;
  auto cut = min_ratio_cut(g, restrict_measure(mu, a), RatioKind::Expansion, threshold);
  r.value = cut.value;
  if (cut.value && *cut.value < alpha) {
    r.expands = false;
    r.witness = cut.side;
  }
  return r;
}

RatioCut all_to_all_respect_exact(const Graph& g, const Measure& w, int threshold) {
  return min_ratio_cut(g, w, RatioKind::AllToAll, threshold);
}

}  // namespace treecut
