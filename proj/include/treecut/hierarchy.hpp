#pragma once

#include "treecut/config.hpp"
#include "treecut/merge_phase.hpp"
#include "treecut/refinement.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace treecut {

enum class BuildMode { Basic, Improved };
std::string mode_name(BuildMode m);
BuildMode parse_mode(const std::string& s);

struct TreeNode {
  VertexSet set;
  int parent = -1;
  std::vector<int> children;
  int64_t weight = 0;    // cap_G(S, V \ S)
  // "root", "component", "merge-l", "merge-r", "merge-part", "refine-leaf"
  std::string kind;
  int depth = 0;
  std::optional<Rational> tau;
  std::optional<int> sigma;
  std::optional<Rational> certificate;
};

// A merge phase applied to the cluster of `node`. part_nodes[i] is the tree
// node of part.children()[i]; for the improved mode refine[i] indexes the
// refinement of that part (or -1 for singletons).
struct MergeRecord {
  int node = -1;
  MergePartition part;
  std::vector<int> part_nodes;
  std::vector<int> refine;
};

struct RefineRecord {
  int node = -1;   // S_i
  int sigma = 0;
  RefinementResult result;
  InterRouting routing;
  std::vector<int> leaf_nodes;  // aligned with result.clusters
};

struct DecompositionTree {
  int n = 0;
  BuildMode mode = BuildMode::Basic;
  std::vector<TreeNode> nodes;  // nodes[0] is the root V
  std::vector<MergeRecord> merges;
  std::vector<RefineRecord> refinements;
  std::vector<std::string> failures;  // self-check messages gathered while building

  int leaf_of(int v) const;
  int height() const;
  const MergeRecord* merge_at(int node) const;
};

DecompositionTree build_basic(const Graph& g, const Config& config = {});
DecompositionTree build_improved(const Graph& g, const Config& config = {});
DecompositionTree build_tree(const Graph& g, BuildMode mode, const Config& config = {});

// Laminarity, partition of every node by its children, singleton leaves
// covering V and weights equal to cap_G(S, V \ S). One message per problem.
// Children must have larger ids than their parent.
std::vector<std::string> validate_tree(const Graph& g, const DecompositionTree& t, bool weights = true);

// Minimum weight of tree edges separating the leaves of b from the rest.
Rational mincut_in_tree(const DecompositionTree& t, const VertexSet& b);

json tree_json(const DecompositionTree& t);
DecompositionTree tree_from_json(const json& j);
void write_tree(std::ostream& out, const DecompositionTree& t);
DecompositionTree read_tree(std::istream& in, const std::string& name = "<tree>");
DecompositionTree read_tree_file(const std::string& path);
void write_dot(std::ostream& out, const DecompositionTree& t);

}  // namespace treecut
