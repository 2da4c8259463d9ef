#include "treecut/random_graphs.hpp"

namespace treecut {

Graph random_graph(int n, double p, int64_t max_cap, bool connected, std::mt19937_64& rng) {
  Graph g(n);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int64_t> cap(1, max_cap);
  if (connected) {
    for (int v = 1; v < n; ++v) {
      std::uniform_int_distribution<int> parent(0, v - 1);
      g.add_edge(parent(rng), v, cap(rng));
    }
  }
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (!g.find_edge(u, v) && coin(rng) < p) g.add_edge(u, v, cap(rng));
  return g;
}

Graph dumbbell(int k) {
  Graph g(2 * k);
  for (int side = 0; side < 2; ++side)
    for (int u = 0; u < k; ++u)
      for (int v = u + 1; v < k; ++v) g.add_edge(side * k + u, side * k + v, 1);
  g.add_edge(k - 1, k, 1);
  return g;
}

Graph complete_graph(int n) {
  Graph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) g.add_edge(u, v, 1);
  return g;
}

Graph cycle_graph(int n) {
  Graph g(n);
  for (int v = 0; v < n; ++v) g.add_edge(v, (v + 1) % n, 1);
  return g;
}

Graph path_graph(int n) {
  Graph g(n);
  for (int v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1, 1);
  return g;
}

}  // namespace treecut
