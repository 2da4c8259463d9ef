#pragma once

#include "treecut/flow.hpp"
#include "treecut/graph.hpp"

#include <json.hpp>

namespace treecut {

using json = nlohmann::ordered_json;

inline json rational_json(const Rational& q) { return q.get_str(); }
inline json optional_json(const std::optional<Rational>& q) {
  return q ? json(q->get_str()) : json(nullptr);
}
Rational rational_from_json(const json& j);
json set_json(const VertexSet& s);
VertexSet set_from_json(const json& j);
// Nonzero edge flows as [u, v, amount] oriented along the flow.
json flow_json(const Graph& g, const FlowSolution& f);
json transfer_json(const TransferMatrix& m);
TransferMatrix transfer_from_json(const json& j);

}  // namespace treecut
