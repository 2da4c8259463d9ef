#pragma once

#include "treecut/hierarchy.hpp"
#include "treecut/json_util.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace treecut {

struct CutRecord {
  VertexSet side;
  int64_t cap = 0;
  Rational mincut = 0;
  Rational ratio = 1;  // mincut / cap; 1 when both are 0
  bool unbounded = false;  // cap 0 but mincut > 0
};

enum class VerifyMode { Auto, Exhaustive, Sampled };

struct VerifyOptions {
  VerifyMode mode = VerifyMode::Auto;
  int samples = 10000;
  uint64_t seed = 1;
  int exhaustive_limit = 12;  // Auto is exhaustive up to this many vertices
  int exhaustive_cap = 22;    // hard limit for an explicit Exhaustive request
};

struct QualityReport {
  int n = 0;
  std::string mode;  // "exhaustive" or "sampled"
  int samples = 0;
  uint64_t seed = 0;
  std::vector<CutRecord> cuts;
  Rational quality = 1;          // max ratio over bounded cuts
  bool unbounded = false;        // some cut has cap 0 and positive mincut
  std::optional<CutRecord> worst;
  std::vector<CutRecord> violations;         // cap_G > mincut_T
  std::vector<std::string> weight_mismatches;  // node weights that differ from cap_G
  bool ok() const { return violations.empty() && weight_mismatches.empty(); }
};

// Throws InputError when t is not a laminar tree over the vertices of g.
// Weights are taken as given and compared against cap_G separately.
QualityReport verify_quality(const Graph& g, const DecompositionTree& t, const VerifyOptions& options = {});

// alpha * log2 n (at least alpha) as the flow quality bound. Throws
// ContractError naming the first violating cut when the report has any.
Rational verify_flow_quality(const QualityReport& report, int n);

json quality_json(const QualityReport& report);
void write_quality_table(std::ostream& out, const QualityReport& report, size_t rows = 10);

}  // namespace treecut
