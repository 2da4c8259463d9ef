#pragma once

#include "treecut/flow.hpp"
#include "treecut/json_util.hpp"
#include "treecut/oracle.hpp"

#include <string>
#include <vector>

namespace treecut {

struct MergeParams {
  Rational logn = 1;            // log2 of the vertex count of the input graph
  Rational theta = rat(3, 10);  // oracle ratio phi * log n, so phi = theta / log n
  int threshold = kDefaultBruteThreshold;
  Rational congestion = 4;      // oracle routing cap
  bool verify = true;           // run the exact self checks on every step
  Rational phi() const { return theta / logn; }
  // Guaranteed capacity shrink of a non-terminal shrink step.
  Rational shrink_factor() const;
};

// Largest component size allowed for a balanced clustering of s vertices.
int balance_limit(int s);
// Does removing f (global edge ids) from G[S] leave components of size at
// most balance_limit(|S|)?
bool induces_balanced(const ClusterView& view, const std::vector<int>& f);
std::vector<VertexSet> components_without(const ClusterView& view, const std::vector<int>& f);
int64_t edge_capacity(const Graph& g, const std::vector<int>& edges);

struct ShrinkResult {
  bool terminal = false;
  std::string choice;           // "expander", "A+C", "F-A+C", "R+C", "A+C terminal"
  std::vector<int> f_tilde;     // global edge ids, sorted
  std::vector<int> a_tilde;     // terminal only
  std::vector<int> c_tilde;     // terminal only
  OracleOutcome outcome;        // on G[S]' (local ids of view)
  ClusterView::View view;       // G[S]'
  RouteResult flow;             // terminal with nonempty C: X_C -> X_A in G[S]'
  Rational received = 0;        // max over X_A of flow received / c(a)
  Rational congestion = 0;
  std::optional<Rational> a_expansion;  // lower bound on the expansion of X_A
  std::optional<Rational> alpha_bound;  // a_exp / (2 (received + 1 + congestion a_exp))
  bool oracle_called = false;
};

// One separator step on a balanced edge set f.
ShrinkResult shrink_step(const ClusterView& view, const std::vector<int>& f, const MergeParams& params);

struct ShrinkRecord {
  OracleCase oracle_case = OracleCase::Expander;
  bool from_case3 = false;
  std::string choice;
  int64_t before = 0;
  int64_t after = 0;
};

struct BalancedClustering {
  VertexSet s;
  std::vector<VertexSet> z;
  std::vector<int> f;        // edges between distinct Z_i
  std::vector<int> f_tilde;  // terminal edge set of the shrink loop
  std::vector<ShrinkRecord> history;
  int iteration_bound = 0;
  int shrink_iterations = 0;
  std::optional<Rational> alpha_bound;     // from the terminal step
  std::optional<Rational> alpha_tilde;     // exact expansion of X_{F~} in G[S]'
  std::optional<Rational> alpha_measured;  // exact expansion of X_F in G[S]'
  std::vector<std::string> failures;       // self-check messages
};

BalancedClustering merge_phase_1(const ClusterView& view, const MergeParams& params);

struct MergePartition {
  BalancedClustering clustering;
  Rational tau = 1;
  VertexSet l, r;
  std::vector<int> y;    // base edges whose split node is in X_Y
  VertexSet x_y;         // split node ids (n + e)
  std::vector<VertexSet> l_parts, r_parts;  // components of L cap Z_i, R cap Z_i
  // Both separator flows as paths over ids of G', starting at their x_y.
  std::vector<FlowPath> to_b, to_f;
  Rational congestion_b = 0, congestion_f = 0;
  Rational sink_b = 0;  // max over X_B of received / c(b)
  Rational sink_f = 0;  // max over X_F of received / c(f)
  std::vector<std::string> failures;
  std::vector<VertexSet> children() const;  // l_parts then r_parts
};

MergePartition merge_phase_2(const ClusterView& view, const BalancedClustering& clustering,
                             const Rational& tau, const MergeParams& params);
MergePartition merge_phase(const ClusterView& view, const Rational& tau, const MergeParams& params);

// Independent re-check of a partition: sizes, separations and both flows.
std::vector<std::string> check_partition(const ClusterView& view, const MergePartition& part);

json partition_json(const MergePartition& part);

}  // namespace treecut
