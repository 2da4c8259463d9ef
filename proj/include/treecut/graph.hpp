#pragma once

#include "treecut/rational.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace treecut {

// Sorted, duplicate free list of vertex ids.
using VertexSet = std::vector<int>;
// Per-vertex nonnegative weights, indexed by vertex id.
using Measure = std::vector<Rational>;

struct Edge {
  int u = 0;
  int v = 0;
  int64_t cap = 0;
  int other(int x) const { return x == u ? v : u; }
};

struct Incidence {
  int neighbor;
  int edge;
};

// Undirected graph with positive integer capacities. Parallel edges are
// merged by adding their capacities; self-loops are rejected.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n);

  int add_vertex();
  // Returns the id of the (possibly pre-existing) edge {u, v}.
  int add_edge(int u, int v, int64_t cap);

  int vertex_count() const { return static_cast<int>(adj_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Incidence>& incident(int v) const { return adj_[v]; }
  int64_t degree(int v) const;
  int64_t total_capacity() const;
  std::optional<int> find_edge(int u, int v) const;

 private:
  static uint64_t key(int u, int v);
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> adj_;
  std::unordered_map<uint64_t, int> index_;
};

VertexSet make_set(std::vector<int> v);
VertexSet all_vertices(int n);
VertexSet set_minus(const VertexSet& a, const VertexSet& b);
VertexSet set_union(const VertexSet& a, const VertexSet& b);
VertexSet set_intersection(const VertexSet& a, const VertexSet& b);
bool contains(const VertexSet& s, int v);
std::vector<char> membership(int n, const VertexSet& s);
VertexSet from_membership(const std::vector<char>& mask);

// Sum of capacities of edges with one endpoint in a and one in b.
int64_t capacity(const Graph& g, const VertexSet& a, const VertexSet& b);
// cap(S, V \ S) where S is given by a membership mask.
int64_t cut_capacity(const Graph& g, const std::vector<char>& side);
int64_t cut_capacity(const Graph& g, const VertexSet& side);

Measure zero_measure(int n);
Measure unit_measure(int n);
Measure indicator(int n, const VertexSet& s);
Rational measure_of(const Measure& mu, const VertexSet& s);
Rational measure_total(const Measure& mu);
Measure restrict_measure(const Measure& mu, const VertexSet& s);

// cap(S, V\S) / min(mu(S), mu(V\S)); nullopt when the minimum is zero.
std::optional<Rational> cut_expansion(const Graph& g, const VertexSet& side, const Measure& mu);

// Induced subgraph with local ids 0..|S|-1 in the order of S.
struct Subgraph {
  Graph graph;
  std::vector<int> to_parent;        // local vertex -> parent vertex
  std::vector<int> edge_to_parent;   // local edge -> parent edge
  std::vector<int> from_parent;      // parent vertex -> local vertex or -1
};
Subgraph induced(const Graph& g, const VertexSet& s);

// Each edge e = {u, v} of capacity c becomes u - x_e - v with both halves of
// capacity c. Split vertex x_e has id n + e; edge halves have ids 2e (u side)
// and 2e + 1 (v side).
struct SubdivisionGraph {
  Graph graph;
  int base_vertices = 0;
  int split_of(int e) const { return base_vertices + e; }
  bool is_split(int x) const { return x >= base_vertices; }
  int edge_of(int x) const { return x - base_vertices; }
};
SubdivisionGraph subdivide(const Graph& g);

// A cluster S of a graph G together with the three views used throughout:
// G[S], G'[S'] and G~(S). Local graphs carry maps back to ids of G' where a
// base vertex keeps its id and x_e is n + e.
class ClusterView {
 public:
  ClusterView(const Graph& g, VertexSet s);

  const Graph& base() const { return *g_; }
  const VertexSet& members() const { return s_; }
  bool has(int v) const { return mask_[v] != 0; }
  int size() const { return static_cast<int>(s_.size()); }
  const std::vector<int>& boundary_edges() const { return boundary_; }
  const std::vector<int>& internal_edges() const { return internal_; }
  int64_t boundary_capacity() const;
  // cap(v, V \ S) for v in S, indexed by position in members().
  std::vector<int64_t> boundary_degree() const;

  struct View {
    Graph graph;
    std::vector<int> to_global;  // local id -> id in G' (base ids are shared)
    std::unordered_map<int, int> from_global;
    int local(int global_id) const;
  };
  // G[S]: base vertices only.
  View induced_view() const;
  // G[S]': subdivision of G[S] (interior split nodes, no boundary ones).
  View subdivided_induced() const;
  // G'[S']: interior split nodes and boundary split nodes.
  View subdivided() const;
  // G~(S): G[S] plus boundary split nodes attached to their endpoint.
  View tilde() const;

 private:
  const Graph* g_;
  VertexSet s_;
  std::vector<char> mask_;
  std::vector<int> boundary_;
  std::vector<int> internal_;
};

// Connected components of G[S] as sorted vertex sets, ordered by minimum id.
std::vector<VertexSet> components(const Graph& g, const VertexSet& s);
bool is_connected(const Graph& g, const VertexSet& s);

// Edge list: "u v cap" per line, '#' starts a comment. Vertex count is one
// more than the largest id unless a "# vertices N" header line is present.
Graph read_edge_list(std::istream& in, const std::string& name = "<input>");
Graph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Graph& g);
// Measure: "v weight" per line.
Measure read_measure(std::istream& in, int n, const std::string& name = "<input>");
Measure read_measure_file(const std::string& path, int n);

}  // namespace treecut
