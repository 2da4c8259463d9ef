#pragma once

#include "treecut/flow.hpp"
#include "treecut/graph.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace treecut {

// Q(u, v) >= 0: amount to send from u to v.
using DemandMatrix = TransferMatrix;

// Signed commodity masses per vertex. Vertex ids are whatever the caller
// uses (base vertices and split nodes n + e share one id space).
class DemandState {
 public:
  using Row = std::map<int, Rational>;  // commodity -> mass

  Rational get(int v, int k) const;
  void add(int v, int k, const Rational& x);  // drops exact zeros
  void add_row(int v, const Row& row, const Rational& scale = 1);
  const Row* row(int v) const;
  Rational load(int v) const;  // ||P(v)||_1
  Rational total_load() const;
  std::vector<int> vertices() const;  // with nonzero rows
  std::vector<int> commodities() const;
  bool empty() const { return rows_.empty(); }
  const std::map<int, Row>& rows() const { return rows_; }
  // Per-commodity sum over all vertices (or over a set).
  Row commodity_sums() const;
  Row commodity_sums(const VertexSet& s) const;
  bool valid() const;

  DemandState operator+(const DemandState& o) const;
  DemandState operator-(const DemandState& o) const;
  DemandState scaled(const Rational& c) const;
  DemandState restricted(const VertexSet& s) const;
  bool operator==(const DemandState& o) const { return rows_ == o.rows_; }

 private:
  std::map<int, Row> rows_;
};

// K = V, P(u,u) = sum_v Q(u,v), P(v,u) = -Q(u,v).
DemandState from_matrix(const DemandMatrix& q);

// sum_k |sum_{u in side} P(u,k)|; side is a membership mask over vertex ids
// (ids beyond the mask are outside). Throws ContractError for invalid states.
Rational dem_across(const DemandState& p, const std::vector<char>& side);
Rational dem_across(const DemandState& p, const VertexSet& side);
// sum over u in side, v outside of Q(u,v) + Q(v,u).
Rational dem_across(const DemandMatrix& q, const std::vector<char>& side);

struct RespectResult {
  std::optional<Rational> ratio;  // nullopt means +infinity
  VertexSet argmin;
};
// min over cuts of cap/dem over all cuts of g with positive demand.
RespectResult respects_exact(const Graph& g, const DemandState& p, int threshold = 20);
// Same over random cuts, singletons and the given extra cuts.
RespectResult respects_sampled(const Graph& g, const DemandState& p, int samples, std::mt19937_64& rng,
                               const std::vector<VertexSet>& extra = {});

// The update P^{up Q}.
DemandState update(const DemandState& p, const DemandMatrix& q);

// Split node ids follow subdivide(): x_e = n + e. Each x_e incident to v gets
// c(e)/deg(v) * P(v). Throws ContractError if ||P(v)|| > deg(v).
std::map<int, DemandState> leaf_init(const DemandState& p, const Graph& g);

struct InvariantResult {
  bool ok = true;
  int clause = 0;  // 1 support, 2 conservation, 3 load
  std::string detail;
};
// Clauses: support on boundary split nodes of S, per-commodity conservation
// against original restricted to S, and ||P(x_e)|| <= alpha * c(e).
InvariantResult invariant_check(const DemandState& p, const ClusterView& cluster,
                                const DemandState& original, const Rational& alpha);

// Random valid state from a random demand matrix on n vertices.
DemandState random_state(int n, std::mt19937_64& rng, int entries, int max_amount = 4);

// "vertex commodity numerator denominator" per entry.
void write_state(std::ostream& out, const DemandState& p);
DemandState read_state(std::istream& in, const std::string& name = "<input>");
DemandState read_state_file(const std::string& path);

}  // namespace treecut
