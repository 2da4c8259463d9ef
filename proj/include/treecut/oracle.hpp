#pragma once

#include "treecut/expansion.hpp"
#include "treecut/flow.hpp"
#include "treecut/json_util.hpp"

#include <string>
#include <vector>

namespace treecut {

struct SparseCut {
  VertexSet side;
  Rational value;
  bool exact = true;  // false when the spectral sweep was used
};

// Exact mu-sparsest cut when the enumeration core is within threshold,
// otherwise the best sweep cut of two spectral orderings. Throws
// ContractError when no cut has positive measure on both sides.
SparseCut sparsest_cut(const Graph& g, const Measure& mu, int threshold = kDefaultBruteThreshold);
std::optional<SparseCut> try_sparsest_cut(const Graph& g, const Measure& mu,
                                          int threshold = kDefaultBruteThreshold);

struct OracleParams {
  Rational phi = 1;
  Rational logn = 1;          // log2 of the size of the whole input graph
  int threshold = kDefaultBruteThreshold;
  Rational congestion = 4;    // cap for the routing flows
  Rational sink_factor = 1;   // sinks receive sink_factor * phi * logn * mu(v)
  Rational c_sparse = rat(5, 3);
  bool promote_small = false;     // report small-but-not-tiny Case 3 as Case 2
  bool flows = true;

  Rational threshold_ratio() const { return phi * logn; }
};

enum class OracleCase { Expander = 1, BalancedCut = 2, UnbalancedExpander = 3 };

struct PeelStep {
  VertexSet peeled;                   // S_t
  VertexSet residual;                 // A_{t+1}
  std::optional<Rational> sparsity;   // in G[A_t]
  bool trim = false;                  // moved out because the flow into A failed
  RouteResult into_peeled;            // in G[S_t] from E(S_t, A_{t+1})
  RouteResult into_residual;          // in G[A_{t+1}]
};

struct OracleOutcome {
  OracleCase tag = OracleCase::Expander;
  bool from_case3 = false;           // Case 2 produced by the promotion rule
  VertexSet a, a_bar;
  std::optional<Rational> cut_sparsity;
  std::optional<Rational> certificate;  // expansion of G (case 1) or G[A] (case 3)
  bool certificate_exact = true;
  std::vector<PeelStep> peels;
  RouteResult into_a;      // in G[A] from E(A, A-bar)
  RouteResult into_a_bar;  // in G[A-bar]
  int trims = 0;
  OracleParams params;
};

OracleOutcome cut_or_expander(const Graph& g, const Measure& mu, const OracleParams& params);

enum class RefinedCase { C1, C2a, C2b, C2c, C3a, C3b };
std::string case_name(RefinedCase c);
std::string case_name(OracleCase c);

struct RefinedOutcome {
  RefinedCase tag = RefinedCase::C1;
  OracleOutcome base;
  VertexSet a;    // A, or A1 in case 2c
  VertexSet a2;   // case 2c only
  std::optional<Rational> sparsity;   // of (A, V\A) or (A1, V\A1)
  std::optional<Rational> sparsity2;  // of (A2, A1\A2) inside G[A1]
  // Into V\A (2a, 2b, 3b), V\A1 (2c) or A (3a).
  RouteResult flow;
  // Case 2c: in G[A2] from E(A2, A1\A2). Case 3b: in G[A] from E(A, V\A).
  RouteResult flow2;
  // The side the flow enters; for 2c also the A2 side of A1.
  VertexSet left() const;
};

RefinedOutcome refined_cut_or_expander(const Graph& g, const Measure& mu, const Measure& nu,
                                       const OracleParams& params);

// Postcondition checkers. Return one message per violated condition.
std::vector<std::string> check_outcome(const Graph& g, const Measure& mu, const OracleOutcome& o);
std::vector<std::string> check_refined(const Graph& g, const Measure& mu, const Measure& nu,
                                       const RefinedOutcome& o);

json outcome_json(const Graph& g, const OracleOutcome& o);
json refined_json(const Graph& g, const RefinedOutcome& o);

}  // namespace treecut
