#include "treecut/hierarchy.hpp"

#include "treecut/errors.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace treecut {

std::string mode_name(BuildMode m) { return m == BuildMode::Basic ? "basic" : "improved"; }

BuildMode parse_mode(const std::string& s) {
  if (s == "basic") return BuildMode::Basic;
  if (s == "improved") return BuildMode::Improved;
  throw ArgumentError("unknown mode '" + s + "' (expected basic or improved)");
}

int DecompositionTree::leaf_of(int v) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].children.empty() && nodes[i].set.size() == 1 && nodes[i].set[0] == v) return static_cast<int>(i);
  return -1;
}

int DecompositionTree::height() const {
  int h = 0;
  for (const TreeNode& x : nodes) h = std::max(h, x.depth);
  return h;
}

const MergeRecord* DecompositionTree::merge_at(int node) const {
  for (const MergeRecord& m : merges)
    if (m.node == node) return &m;
  return nullptr;
}

namespace {

struct Builder {
  const Graph& g;
  const Config& config;
  DecompositionTree& t;
  MergeParams mp;
  RefineParams rp;
  Rational tau;

  std::string where(const VertexSet& s) const { return "cluster of " + std::to_string(s.size()); }

  void note(const std::string& prefix, const std::vector<std::string>& msgs) {
    for (const auto& m : msgs) t.failures.push_back(prefix + ": " + m);
  }

  // Node for `set` under `parent`, reusing the parent when the sets agree.
  int child(int parent, const VertexSet& set, const std::string& kind) {
    if (t.nodes[parent].set == set) return parent;
    TreeNode x;
    x.set = set;
    x.parent = parent;
    x.kind = kind;
    x.weight = cut_capacity(g, set);
    t.nodes.push_back(std::move(x));
    int id = static_cast<int>(t.nodes.size()) - 1;
    t.nodes[parent].children.push_back(id);
    return id;
  }

  void merge_cluster(int node) {
    VertexSet s = t.nodes[node].set;
    if (s.size() < 2) return;
    bool improved = t.mode == BuildMode::Improved;
    Rational level_tau = improved ? Rational(1) : tau;
    ClusterView view(g, s);
    MergeRecord rec;
    rec.node = node;
    rec.part = merge_phase(view, level_tau, mp);
    note(where(s) + " merge", rec.part.clustering.failures);
    note(where(s) + " merge", rec.part.failures);
    if (config.verify) note(where(s) + " partition", check_partition(view, rec.part));

    int lnode = rec.part.l.empty() ? -1 : child(node, rec.part.l, "merge-l");
    int rnode = rec.part.r.empty() ? -1 : child(node, rec.part.r, "merge-r");
    for (int x : {lnode, rnode})
      if (x >= 0 && x != node) t.nodes[x].tau = level_tau;
    for (const VertexSet& p : rec.part.l_parts) rec.part_nodes.push_back(child(lnode, p, "merge-part"));
    for (const VertexSet& p : rec.part.r_parts) rec.part_nodes.push_back(child(rnode, p, "merge-part"));
    for (int x : rec.part_nodes) {
      t.nodes[x].tau = level_tau;
      if (3 * t.nodes[x].set.size() > 2 * s.size())
        t.failures.push_back(where(s) + ": second-level cluster above 2/3 of its grandparent");
    }
    size_t index = t.merges.size();
    t.merges.push_back(std::move(rec));
    std::vector<int> parts = t.merges[index].part_nodes;

    if (!improved) {
      for (int x : parts) merge_cluster(x);
      return;
    }
    int sigma = static_cast<int>(s.size());
    std::vector<int> refs;
    std::vector<std::vector<int>> next;
    for (int x : parts) {
      const VertexSet si = t.nodes[x].set;
      if (si.size() < 2) {
        refs.push_back(-1);
        next.emplace_back();
        continue;
      }
      if (2 * sigma < 3 * static_cast<int>(si.size()))
        throw ContractError("merge output of " + std::to_string(si.size()) + " too large for sigma " +
                            std::to_string(sigma));
      RefineRecord rr;
      rr.node = x;
      rr.sigma = sigma;
      rr.result = refine(ClusterView(g, si), sigma, rp);
      rr.routing = route_inter_to_boundary(g, rr.result.tree, rp);
      note(where(si) + " refine", rr.result.failures);
      note(where(si) + " routing", rr.routing.failures);
      t.nodes[x].sigma = sigma;
      for (const VertexSet& c : rr.result.clusters) {
        int leaf = child(x, c, "refine-leaf");
        t.nodes[leaf].sigma = sigma;
        for (const RefinementNode& rn : rr.result.tree.nodes)
          if (rn.leaf() && rn.set == c) t.nodes[leaf].certificate = rn.certificate;
        rr.leaf_nodes.push_back(leaf);
      }
      refs.push_back(static_cast<int>(t.refinements.size()));
      next.push_back(rr.leaf_nodes);
      t.refinements.push_back(std::move(rr));
    }
    t.merges[index].refine = refs;
    for (size_t i = 0; i < parts.size(); ++i) {
      if (next[i].empty()) continue;
      for (int leaf : next[i]) merge_cluster(leaf);
    }
  }
};

void finish(DecompositionTree& t) {
  for (TreeNode& x : t.nodes)
    std::sort(x.children.begin(), x.children.end(),
              [&](int a, int b) { return t.nodes[a].set.front() < t.nodes[b].set.front(); });
  for (size_t i = 1; i < t.nodes.size(); ++i) {
    // Parents are created before their children.
    t.nodes[i].depth = t.nodes[t.nodes[i].parent].depth + 1;
  }
}

}  // namespace

DecompositionTree build_tree(const Graph& g, BuildMode mode, const Config& config) {
  int n = g.vertex_count();
  if (n < 1) throw ArgumentError("cannot build a tree for an empty graph");
  DecompositionTree t;
  t.n = n;
  t.mode = mode;
  TreeNode root;
  root.set = all_vertices(n);
  root.kind = "root";
  t.nodes.push_back(root);
  Builder b{g, config, t, config.merge_params(n), config.refine_params(n), config.basic_tau(n)};
  auto comps = components(g, root.set);
  if (comps.size() > 1) {
    std::vector<int> ids;
    for (const VertexSet& c : comps) ids.push_back(b.child(0, c, "component"));
    for (int id : ids) b.merge_cluster(id);
  } else {
    b.merge_cluster(0);
  }
  finish(t);
  return t;
}

DecompositionTree build_basic(const Graph& g, const Config& config) { return build_tree(g, BuildMode::Basic, config); }
DecompositionTree build_improved(const Graph& g, const Config& config) {
  return build_tree(g, BuildMode::Improved, config);
}

std::vector<std::string> validate_tree(const Graph& g, const DecompositionTree& t, bool weights) {
  std::vector<std::string> out;
  int n = g.vertex_count();
  if (t.n != n) out.push_back("tree is for " + std::to_string(t.n) + " vertices, graph has " + std::to_string(n));
  if (t.nodes.empty()) {
    out.push_back("tree has no nodes");
    return out;
  }
  if (t.nodes[0].set != all_vertices(n) || t.nodes[0].parent != -1) out.push_back("root is not V");
  int count = static_cast<int>(t.nodes.size());
  std::vector<int> seen_leaf(n, 0);
  for (int i = 0; i < count; ++i) {
    const TreeNode& x = t.nodes[i];
    std::string id = "node " + std::to_string(i);
    if (x.set.empty()) out.push_back(id + " is empty");
    for (int v : x.set)
      if (v < 0 || v >= n) {
        out.push_back(id + " has vertex " + std::to_string(v) + " outside the graph");
        return out;
      }
    if (weights && i > 0 && x.weight != cut_capacity(g, x.set))
      out.push_back(id + " has weight " + std::to_string(x.weight) + " but cut capacity " +
                    std::to_string(cut_capacity(g, x.set)));
    if (x.children.empty()) {
      if (x.set.size() != 1) out.push_back(id + " is a leaf with " + std::to_string(x.set.size()) + " vertices");
      else ++seen_leaf[x.set[0]];
      continue;
    }
    VertexSet all;
    size_t total = 0;
    for (int c : x.children) {
      if (c <= i || c >= count || t.nodes[c].parent != i) {
        out.push_back(id + " has a bad child link");
        continue;
      }
      all = set_union(all, t.nodes[c].set);
      total += t.nodes[c].set.size();
    }
    if (all != x.set || total != x.set.size()) out.push_back(id + ": children do not partition the node");
  }
  for (int v = 0; v < n; ++v)
    if (seen_leaf[v] != 1) out.push_back("vertex " + std::to_string(v) + " is not in exactly one leaf");
  return out;
}

Rational mincut_in_tree(const DecompositionTree& t, const VertexSet& b) {
  if (b.empty() || static_cast<int>(b.size()) >= t.n) throw ArgumentError("cut side must be a proper nonempty subset");
  std::vector<char> in = membership(t.n, b);
  const int64_t inf = std::numeric_limits<int64_t>::max() / 4;
  int count = static_cast<int>(t.nodes.size());
  // cost[i][s]: cheapest cut of the subtree at i when i sits on side s.
  std::vector<std::array<int64_t, 2>> cost(count);
  for (int i = count - 1; i >= 0; --i) {
    const TreeNode& x = t.nodes[i];
    if (x.children.empty()) {
      bool side = x.set.size() == 1 && in[x.set[0]];
      cost[i] = {side ? inf : 0, side ? 0 : inf};
      continue;
    }
    for (int s = 0; s < 2; ++s) {
      int64_t total = 0;
      for (int c : x.children) {
        int64_t keep = cost[c][s], cut = cost[c][1 - s] >= inf ? inf : cost[c][1 - s] + t.nodes[c].weight;
        total += std::min(keep, cut);
        if (total >= inf) break;
      }
      cost[i][s] = std::min(total, inf);
    }
  }
  return rat_from_int64(std::min(cost[0][0], cost[0][1]));
}

json tree_json(const DecompositionTree& t) {
  json j;
  j["format_version"] = 1;
  j["mode"] = mode_name(t.mode);
  j["n"] = t.n;
  j["height"] = t.height();
  json nodes = json::array();
  for (size_t i = 0; i < t.nodes.size(); ++i) {
    const TreeNode& x = t.nodes[i];
    json o;
    o["id"] = i;
    o["set"] = set_json(x.set);
    o["parent"] = x.parent;
    o["children"] = x.children;
    o["weight"] = x.weight;
    o["kind"] = x.kind;
    o["depth"] = x.depth;
    if (x.tau) o["tau"] = rational_json(*x.tau);
    if (x.sigma) o["sigma"] = *x.sigma;
    if (x.certificate) o["certificate"] = rational_json(*x.certificate);
    nodes.push_back(std::move(o));
  }
  j["nodes"] = std::move(nodes);
  j["build_failures"] = t.failures;
  return j;
}

DecompositionTree tree_from_json(const json& j) {
  DecompositionTree t;
  try {
    if (j.at("format_version").get<int>() != 1) throw InputError("unsupported tree format_version");
    t.mode = parse_mode(j.at("mode").get<std::string>());
    t.n = j.at("n").get<int>();
    const json& nodes = j.at("nodes");
    for (size_t i = 0; i < nodes.size(); ++i) {
      const json& o = nodes[i];
      if (o.at("id").get<size_t>() != i) throw InputError("tree node ids must be 0..k-1 in order");
      TreeNode x;
      x.set = set_from_json(o.at("set"));
      x.parent = o.at("parent").get<int>();
      x.children = o.at("children").get<std::vector<int>>();
      x.weight = o.at("weight").get<int64_t>();
      x.kind = o.at("kind").get<std::string>();
      x.depth = o.at("depth").get<int>();
      if (o.contains("tau")) x.tau = rational_from_json(o["tau"]);
      if (o.contains("sigma")) x.sigma = o["sigma"].get<int>();
      if (o.contains("certificate")) x.certificate = rational_from_json(o["certificate"]);
      t.nodes.push_back(std::move(x));
    }
    if (j.contains("build_failures")) t.failures = j["build_failures"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed tree: ") + e.what());
  } catch (const ArgumentError& e) {
    throw InputError(std::string("malformed tree: ") + e.what());
  }
  int count = static_cast<int>(t.nodes.size());
  for (int i = 0; i < count; ++i) {
    int p = t.nodes[i].parent;
    if ((i == 0) != (p == -1) || p >= i) throw InputError("tree node " + std::to_string(i) + " has a bad parent");
    for (int c : t.nodes[i].children)
      if (c <= i || c >= count) throw InputError("tree node " + std::to_string(i) + " has a bad child");
  }
  return t;
}

void write_tree(std::ostream& out, const DecompositionTree& t) { out << tree_json(t).dump(2) << "\n"; }

DecompositionTree read_tree(std::istream& in, const std::string& name) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(name + ": " + e.what());
  }
  try {
    return tree_from_json(j);
  } catch (const InputError& e) {
    throw InputError(name + ": " + e.what());
  }
}

DecompositionTree read_tree_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_tree(in, path);
}

void write_dot(std::ostream& out, const DecompositionTree& t) {
  out << "digraph tree {\n  node [shape=box];\n";
  for (size_t i = 0; i < t.nodes.size(); ++i) {
    const TreeNode& x = t.nodes[i];
    std::string label = "{";
    for (size_t k = 0; k < x.set.size(); ++k) label += (k ? "," : "") + std::to_string(x.set[k]);
    label += "}";
    out << "  n" << i << " [label=\"" << label << "\\n" << x.kind;
    if (i > 0) out << " w=" << x.weight;
    out << "\"];\n";
  }
  for (size_t i = 0; i < t.nodes.size(); ++i)
    for (int c : t.nodes[i].children) out << "  n" << i << " -> n" << c << ";\n";
  out << "}\n";
}

}  // namespace treecut
