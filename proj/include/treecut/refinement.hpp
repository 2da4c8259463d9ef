#pragma once

#include "treecut/flow.hpp"
#include "treecut/json_util.hpp"
#include "treecut/oracle.hpp"

#include <map>
#include <string>
#include <vector>

namespace treecut {

struct RefineParams {
  int n = 1;                    // vertex count of the input graph
  Rational logn = 1;
  Rational loglogn = 1;
  Rational c_phi = rat(3, 80);
  Rational c0 = 1;              // declared sink constant of the oracle flows
  Rational c_f = 1;
  Rational kappa = rat(3, 160);
  int threshold = kDefaultBruteThreshold;
  Rational congestion = 4;
  bool verify = true;
  // Defaults for an input graph with n vertices: c_f = 4 c0 / log2(4/3),
  // kappa = c_phi / 2.
  static RefineParams for_graph(int n);
};

// c_f * log2(sigma / size) * loglog n. Requires 2 sigma >= 3 size.
Rational f_value(int cluster_size, int sigma, int n, const Rational& c_f);

struct RefinementNode {
  VertexSet set;                 // D
  std::string tag;               // refined case name, "2c-inner", "3b-kept", "empty"
  int left = -1, right = -1;     // children; the flow enters the left one
  int parent = -1;
  int left_depth = 1;
  Rational f = 0, phi = 0, theta = 0;  // f(D), phi_D, phi_D log n
  std::vector<int> cut_edges;    // E(left, right), global edge ids
  ClusterView::View view;        // G~ of the cluster whose measure the flow uses
  RouteResult flow;              // into left~ from cut_edges, over view.graph
  int relocated = 0;             // boundary split nodes moved to their endpoint's side
  std::optional<Rational> certificate;  // leaves: lower bound on the expansion of X_B
  bool leaf() const { return left < 0 && right < 0; }
};

struct RefinementTree {
  int sigma = 0;
  std::vector<RefinementNode> nodes;  // nodes[0] is the root
};

struct LeafCheck {
  VertexSet set;
  Rational required = 0;               // kappa / (f log n)
  std::optional<Rational> respect;     // exact all-to-all ratio, nullopt if vacuous
  bool checked = false;                // false above the enumeration range
  bool ok = true;
};

struct RefinementResult {
  RefinementTree tree;
  std::vector<VertexSet> clusters;     // leaves, sorted
  std::vector<LeafCheck> leaf_checks;
  std::vector<std::string> failures;
};

RefinementResult refine(const ClusterView& view, int sigma, const RefineParams& params);

struct InterRouting {
  std::map<int, Rational> load;           // boundary split node -> amount at the end
  Rational max_load = 0;                  // max of load / c(b)
  std::vector<Rational> phi_by_depth;     // measured Phi(j), index j (0 unused)
  std::vector<Rational> envelope;         // prod_{l=j}^{top} (1 + 1/(l loglog n))
  Rational congestion = 0;                // sum of |flow| / cap over G'[S']
  TransferMatrix transfer;                // inter-cluster split node -> boundary split node
  std::vector<std::string> failures;
};

// Routes c(f) units from every inter-cluster split node of the tree's leaves
// to the boundary split nodes of the root, bottom up along the tree.
InterRouting route_inter_to_boundary(const Graph& g, const RefinementTree& tree, const RefineParams& params);

// prod_{l=j}^{top} (1 + 1/(l * loglogn)).
Rational load_envelope(int j, int top, const Rational& loglogn);
// prod_{l=1}^{k} (1 + c/l) <= k^{2c}, decided exactly.
bool product_bound_holds(int k, const Rational& c);

json refinement_json(const RefinementResult& r);

}  // namespace treecut
