#pragma once

#include "treecut/graph.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace treecut {

// Single commodity network: graph edges with capacity edge_scale * cap in
// either direction, plus a super source and super sink attached to vertices.
struct FlowNetwork {
  Graph graph;
  Rational edge_scale = 1;
  Measure source;  // per vertex, capacity of s -> v
  Measure sink;    // per vertex, capacity of v -> t

  explicit FlowNetwork(Graph g);
};

struct FlowSolution {
  std::vector<Rational> edge_flow;  // signed; positive means edge.u -> edge.v
  Measure source_flow;
  Measure sink_flow;
  Rational value = 0;
  Rational congestion = 0;  // max |f(e)| / cap(e)
};

struct MaxFlowResult {
  FlowSolution flow;
  std::vector<char> source_side;  // residual reachability from s
};

MaxFlowResult max_flow(const FlowNetwork& net);

// Exact max flow; its min cut is 1-fair, so it serves every alpha >= 1.
MaxFlowResult fair_cut(const FlowNetwork& net, const Rational& alpha);

// Empty string when sol is a feasible flow for net.
std::string check_flow(const FlowNetwork& net, const FlowSolution& sol);
Rational recompute_congestion(const Graph& g, const std::vector<Rational>& edge_flow);

struct FlowPath {
  std::vector<int> vertices;  // from the source end to the sink end
  Rational amount;
};

struct TransferMatrix {
  std::map<std::pair<int, int>, Rational> entries;
  Rational total() const;
  Measure row_sums(int n) const;
  Measure col_sums(int n) const;
  void add(int from, int to, const Rational& amount);
};

// Path decomposition by repeated shortest augmenting paths; cycles are left
// over and discarded. Throws ContractError if sol does not conserve flow.
std::vector<FlowPath> decompose_paths(const FlowSolution& sol, const FlowNetwork& net);
TransferMatrix decompose(const FlowSolution& sol, const FlowNetwork& net);

struct RouteResult {
  bool feasible = false;
  FlowSolution flow;         // over the edges of the full graph, zero outside G[D]
  Measure demand;            // units sourced at each vertex
  VertexSet certificate;     // U in D with demand(U) > sinks(U) + congestion * cap(U, D\U)
};

// Each vertex v in D sources the capacity of the given cut edges at v; the
// flow stays inside G[D], sinks at v are bounded by sink_caps[v] and edges
// carry at most congestion * cap.
RouteResult route_from_cut(const Graph& g, const VertexSet& d, const std::vector<int>& cut_edges,
                           const Measure& sink_caps, const Rational& congestion);

// Same, with explicit per-vertex demand instead of cut edges.
RouteResult route_demand(const Graph& g, const VertexSet& d, const Measure& demand,
                         const Measure& sink_caps, const Rational& congestion);

// "u v amount" per edge with nonzero flow, oriented along the flow.
void write_flow(std::ostream& out, const Graph& g, const FlowSolution& sol);

}  // namespace treecut
