#pragma once

#include "treecut/graph.hpp"

#include <optional>

namespace treecut {

inline constexpr int kDefaultBruteThreshold = 18;

enum class RatioKind {
  Expansion,  // cap / min(mu(S), mu(V\S))
  AllToAll,   // cap / dem of D(u,v) = mu(u)mu(v)/mu(V) over ordered pairs
};

struct RatioCut {
  std::optional<Rational> value;  // nullopt when no cut has a positive denominator
  VertexSet side;                 // one side of an optimal cut
};

// Exact minimum of the chosen ratio over all cuts of g.
//
// Enumerates a vertex cover ("core") of g and treats the remaining
// independent vertices with a knapsack over their measure, which is exact
// because an independent vertex only interacts with core vertices. On
// subdivision graphs the core is the base vertex set. Throws SizeError when
// the core exceeds `threshold` vertices. Measures must have finite total
// after scaling to a common denominator.
RatioCut min_ratio_cut(const Graph& g, const Measure& mu, RatioKind kind,
                       int threshold = kDefaultBruteThreshold);

std::optional<Rational> graph_expansion_exact(const Graph& g, const Measure& mu,
                                              int threshold = kDefaultBruteThreshold);

struct ExpandsResult {
  bool expands = true;
  std::optional<Rational> value;    // exact expansion w.r.t. mu restricted to A
  std::optional<VertexSet> witness; // violating cut when !expands
};

// Does A alpha-expand in g with respect to mu, i.e. is g an alpha-expander
// for mu * 1_A?
ExpandsResult set_expands_exact(const Graph& g, const VertexSet& a, const Measure& mu,
                                const Rational& alpha, int threshold = kDefaultBruteThreshold);

// Worst cap/dem over cuts for the all-to-all problem on the weighted set
// given by w (D(u,v) = w(u)w(v)/w(V)). For a 0/1 weight this is the all-to-all
// problem D_A(u,v) = 1/|A|.
RatioCut all_to_all_respect_exact(const Graph& g, const Measure& w,
                                  int threshold = kDefaultBruteThreshold);

}  // namespace treecut
