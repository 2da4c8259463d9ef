#include "treecut/verifier.hpp"

#include "treecut/config.hpp"
#include "treecut/errors.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <random>
#include <thread>

namespace treecut {

namespace {

std::string cut_text(const VertexSet& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) out += (i ? " " : "") + std::to_string(s[i]);
  return "{" + out + "}";
}

CutRecord measure(const Graph& g, const DecompositionTree& t, const VertexSet& side) {
  CutRecord r;
  r.side = side;
  r.cap = cut_capacity(g, side);
  r.mincut = mincut_in_tree(t, side);
  if (r.cap > 0) r.ratio = r.mincut / rat_from_int64(r.cap);
  else if (r.mincut > 0) r.unbounded = true;
  return r;
}

// Sides are generated up front so the record order does not depend on threads.
std::vector<CutRecord> measure_all(const Graph& g, const DecompositionTree& t, const std::vector<VertexSet>& sides) {
  std::vector<CutRecord> out(sides.size());
  size_t workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, sides.size() / 256 + 1);
  auto run = [&](size_t w) {
    for (size_t i = w; i < sides.size(); i += workers) out[i] = measure(g, t, sides[i]);
  };
  std::vector<std::thread> pool;
  for (size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace

QualityReport verify_quality(const Graph& g, const DecompositionTree& t, const VerifyOptions& options) {
  int n = g.vertex_count();
  std::vector<std::string> problems = validate_tree(g, t, false);
  if (!problems.empty()) throw InputError("tree does not match the graph: " + problems.front());
  QualityReport rep;
  rep.n = n;
  for (size_t i = 1; i < t.nodes.size(); ++i) {
    int64_t c = cut_capacity(g, t.nodes[i].set);
    if (t.nodes[i].weight != c)
      rep.weight_mismatches.push_back("node " + std::to_string(i) + " " + cut_text(t.nodes[i].set) + " has weight " +
                                      std::to_string(t.nodes[i].weight) + ", cut capacity " + std::to_string(c));
  }
  if (n < 2) {
    rep.mode = "exhaustive";
    return rep;
  }

  std::vector<VertexSet> sides;
  bool exhaustive = options.mode == VerifyMode::Exhaustive ||
                    (options.mode == VerifyMode::Auto && n <= options.exhaustive_limit);
  if (exhaustive) {
    if (n > options.exhaustive_cap)
      throw SizeError("exhaustive verification of " + std::to_string(n) + " vertices exceeds the cap " +
                      std::to_string(options.exhaustive_cap));
    rep.mode = "exhaustive";
    // Vertex n - 1 stays on the far side, so each cut appears once.
    uint64_t limit = uint64_t{1} << (n - 1);
    for (uint64_t mask = 1; mask < limit; ++mask) {
      VertexSet side;
      for (int v = 0; v < n - 1; ++v)
        if ((mask >> v) & 1) side.push_back(v);
      sides.push_back(std::move(side));
    }
  } else {
    rep.mode = "sampled";
    rep.samples = options.samples;
    rep.seed = options.seed;
    std::mt19937_64 rng(options.seed);
    for (int i = 0; i < options.samples; ++i) {
      VertexSet side;
      while (side.empty() || static_cast<int>(side.size()) == n) {
        side.clear();
        for (int v = 0; v < n; ++v)
          if (rng() & 1) side.push_back(v);
      }
      sides.push_back(std::move(side));
    }
    for (int v = 0; v < n; ++v) sides.push_back({v});
    for (size_t i = 1; i < t.nodes.size(); ++i)
      if (static_cast<int>(t.nodes[i].set.size()) < n) sides.push_back(t.nodes[i].set);
  }
  rep.cuts = measure_all(g, t, sides);

  for (const CutRecord& c : rep.cuts) {
    if (rat_from_int64(c.cap) > c.mincut) rep.violations.push_back(c);
    if (c.unbounded) {
      rep.unbounded = true;
      continue;
    }
    if (!rep.worst || c.ratio > rep.worst->ratio) rep.worst = c;
  }
  if (rep.worst) rep.quality = rep.worst->ratio;
  return rep;
}

Rational verify_flow_quality(const QualityReport& report, int n) {
  if (!report.violations.empty())
    throw ContractError("lower bound violated on cut " + cut_text(report.violations.front().side));
  if (!report.weight_mismatches.empty()) throw ContractError(report.weight_mismatches.front());
  if (report.unbounded) throw ContractError("some cut has zero capacity but positive tree cut");
  return report.quality * graph_logn(n);
}

json quality_json(const QualityReport& r) {
  json j;
  j["format_version"] = 1;
  j["n"] = r.n;
  j["mode"] = r.mode;
  if (r.mode == "sampled") {
    j["samples"] = r.samples;
    j["seed"] = r.seed;
  }
  j["cuts_checked"] = r.cuts.size();
  j["quality"] = to_string(r.quality);
  j["unbounded"] = r.unbounded;
  if (r.worst) {
    j["worst_cut"] = r.worst->side;
    j["worst_cap"] = r.worst->cap;
    j["worst_mincut"] = to_string(r.worst->mincut);
  }
  json v = json::array();
  for (const CutRecord& c : r.violations) {
    json x;
    x["cut"] = c.side;
    x["cap"] = c.cap;
    x["mincut"] = to_string(c.mincut);
    v.push_back(x);
  }
  j["violations"] = v;
  j["weight_mismatches"] = r.weight_mismatches;
  j["ok"] = r.ok();
  return j;
}

void write_quality_table(std::ostream& out, const QualityReport& r, size_t rows) {
  out << "mode " << r.mode;
  if (r.mode == "sampled") out << " (" << r.samples << " samples, seed " << r.seed << ")";
  out << ", " << r.cuts.size() << " cuts\n";
  out << "quality " << to_string(r.quality) << " ~ " << std::fixed << std::setprecision(4)
      << r.quality.get_d() << "\n";
  std::vector<const CutRecord*> order;
  for (const CutRecord& c : r.cuts) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(),
                   [](const CutRecord* a, const CutRecord* b) { return a->ratio > b->ratio; });
  out << std::left << std::setw(10) << "cap" << std::setw(12) << "mincut_T" << std::setw(10) << "ratio"
      << "cut\n";
  for (size_t i = 0; i < order.size() && i < rows; ++i) {
    const CutRecord& c = *order[i];
    out << std::setw(10) << c.cap << std::setw(12) << to_string(c.mincut) << std::setw(10)
        << (c.unbounded ? std::string("inf") : to_string(c.ratio)) << cut_text(c.side) << "\n";
  }
  for (const CutRecord& c : r.violations)
    out << "VIOLATION cap " << c.cap << " > mincut_T " << to_string(c.mincut) << " on " << cut_text(c.side) << "\n";
  for (const std::string& m : r.weight_mismatches) out << "WEIGHT MISMATCH " << m << "\n";
  out << (r.ok() ? "ok" : "FAILED") << "\n";
}

}  // namespace treecut
