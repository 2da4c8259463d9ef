#include "treecut/json_util.hpp"

#include "treecut/errors.hpp"

namespace treecut {

Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return rat_from_int64(j.get<int64_t>());
  if (!j.is_string()) throw InputError("expected a rational string");
  return parse_rational(j.get<std::string>());
}

json set_json(const VertexSet& s) {
  json a = json::array();
  for (int v : s) a.push_back(v);
  return a;
}

VertexSet set_from_json(const json& j) {
  if (!j.is_array()) throw InputError("expected a vertex list");
  std::vector<int> v;
  for (const auto& x : j) v.push_back(x.get<int>());
  return make_set(std::move(v));
}

json flow_json(const Graph& g, const FlowSolution& f) {
  json a = json::array();
  for (int e = 0; e < g.edge_count(); ++e) {
    if (f.edge_flow.empty() || f.edge_flow[e] == 0) continue;
    const Edge& ed = g.edge(e);
    if (f.edge_flow[e] > 0)
      a.push_back({ed.u, ed.v, f.edge_flow[e].get_str()});
    else
      a.push_back({ed.v, ed.u, Rational(-f.edge_flow[e]).get_str()});
  }
  return a;
}

json transfer_json(const TransferMatrix& m) {
  json a = json::array();
  for (const auto& [k, x] : m.entries) a.push_back({k.first, k.second, x.get_str()});
  return a;
}

TransferMatrix transfer_from_json(const json& j) {
  TransferMatrix m;
  if (!j.is_array()) throw InputError("expected a transfer list");
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3) throw InputError("transfer entries are [from, to, amount]");
    m.add(e[0].get<int>(), e[1].get<int>(), rational_from_json(e[2]));
  }
  return m;
}

}  // namespace treecut
