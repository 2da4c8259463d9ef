#pragma once

#include "treecut/config.hpp"
#include "treecut/demand_state.hpp"
#include "treecut/hierarchy.hpp"
#include "treecut/json_util.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace treecut {

// (B, W) of G and its lift (B', W') to G': split nodes of edges touching B go
// to B'. side is a membership mask over G' ids (n + m entries).
struct LiftedCut {
  int n = 0;
  VertexSet b;
  std::vector<char> side;
  std::vector<int> crossing;  // base edges of G crossing (B, W)

  static LiftedCut make(const Graph& g, const VertexSet& b);
};

// Base edges e crossing (B, W) whose W endpoint lies in s, i.e. the half edges
// (x_e, w) of E(B', W') inside G'[S'].
std::vector<int> crossing_in(const Graph& g, const LiftedCut& cut, const VertexSet& s);
int64_t crossing_capacity(const Graph& g, const LiftedCut& cut, const VertexSet& s);

struct ReplayStep {
  std::string name;
  DemandMatrix q;
  DemandState state;     // after the step (the part of the state it acts on)
  Rational dem_diff = 0; // dem of (before - after) across (B', W')
  Rational dem_q = 0;    // dem of q across (B', W')
};

struct ReplayTrace {
  VertexSet cluster;
  std::vector<ReplayStep> steps;
};

// One charge application: charge = dem / cap spread over crossing_in(scope).
struct ChargeEntry {
  std::string kind;  // "merge", "uniformize", "inter-route"
  VertexSet scope;
  Rational dem = 0;
  int64_t cap = 0;
  Rational charge = 0;
};

struct ClusterReplay {
  DemandState state;  // on X_B of the cluster
  Rational alpha = 1; // load the state is certified for
  std::vector<ChargeEntry> charges;
  std::vector<ReplayTrace> traces;
};

// One basic merge step on cluster s. states[i] belongs to part.children()[i]
// and satisfies the invariant for it with load alpha. original is the demand
// state P on V. Throws ReplayError naming the first claim that fails.
ClusterReplay replay_merge_cluster(const Graph& g, const VertexSet& s, const std::vector<DemandState>& states,
                                   const MergePartition& part, const LiftedCut& cut, const Rational& alpha,
                                   const DemandState& original, const Rational& charge_c = 6);

// Refinement side of one merge part S_i.
struct RefinedPart {
  VertexSet set;                        // S_i
  std::vector<VertexSet> leaves;        // S_{i,j}
  std::vector<DemandState> states;      // aligned with leaves
  std::vector<Rational> alphas;         // aligned with leaves
  const InterRouting* routing = nullptr;  // null for a single leaf equal to S_i
};

// Improved step: uniformize every S_{i,j}, route F_i to B_i, then the merge
// step with tau = 1. parts are aligned with part.children().
ClusterReplay replay_improved_cluster(const Graph& g, const VertexSet& s, const std::vector<RefinedPart>& parts,
                                      const MergePartition& part, const LiftedCut& cut, const DemandState& original,
                                      const Rational& charge_c = 6);

struct ChargeLedger {
  std::map<int, Rational> edge_charge;  // crossing base edge -> accumulated charge
  std::vector<ChargeEntry> entries;
  DemandState active;                   // P_Q at the end
  Rational dem_initial = 0;             // dem of P_Q0 across (B', W')
  Rational dem_p = 0;                   // dem_P(B, W)
  int64_t cut_capacity = 0;             // cap_G(B, W)
  Rational covered = 0;                 // sum of charge(e) c(e)
  Rational max_charge = 0;
  Rational max_alpha = 1;
  int steps = 0;

  void apply(const Graph& g, const LiftedCut& cut, const ChargeEntry& entry);
};

struct ReplayReport {
  ChargeLedger ledger;
  bool pass = false;
  std::string message;
  Rational envelope = 0;  // log^3 n (basic) or log^2 n max(1, loglog n) (improved)
  std::vector<ReplayTrace> traces;
};

// Bottom-up replay over t for the state p and the cut (b, V \ b). Throws
// InputError when p is not 1-respected by t and ReplayError on a failed claim.
ReplayReport full_replay(const Graph& g, const DecompositionTree& t, const DemandState& p, const VertexSet& b,
                         const Config& config = {}, bool keep_traces = false);

// max over non-root tree nodes of dem_P(S) / weight(S); p is 1-respected iff
// the value is <= 1. nullopt when some zero-weight node carries demand.
std::optional<Rational> tree_respect_ratio(const DecompositionTree& t, const DemandState& p);

json ledger_json(const Graph& g, const ReplayReport& r);

}  // namespace treecut
