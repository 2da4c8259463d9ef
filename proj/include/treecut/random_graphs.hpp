#pragma once

#include "treecut/graph.hpp"

#include <random>

namespace treecut {

// Erdos-Renyi style graph with edge probability p and capacities uniform in
// [1, max_cap]. When `connected` is set a random spanning tree is added first.
Graph random_graph(int n, double p, int64_t max_cap, bool connected, std::mt19937_64& rng);

// Two cliques of size k joined by a single unit edge.
Graph dumbbell(int k);
Graph complete_graph(int n);
Graph cycle_graph(int n);
Graph path_graph(int n);

}  // namespace treecut
