#include "treecut/charging.hpp"
#include "treecut/errors.hpp"
#include "treecut/hierarchy.hpp"
#include "treecut/oracle.hpp"
#include "treecut/verifier.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace treecut;

namespace {

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

Config load_config(const std::string& path) { return path.empty() ? Config{} : read_config_file(path); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

// "0,3,5", "0 3 5" or a file holding such a list.
VertexSet parse_vertex_list(const std::string& arg, int n) {
  std::string text = arg;
  if (std::filesystem::is_regular_file(arg)) {
    std::ifstream in(arg);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  std::string cleaned;
  for (char c : text) cleaned += (c == ',' || c == ';') ? ' ' : c;
  std::istringstream in(cleaned);
  std::vector<int> out;
  std::string word;
  while (in >> word) {
    if (word[0] == '#') break;
    size_t used = 0;
    int v = -1;
    try {
      v = std::stoi(word, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != word.size()) throw InputError("cut: '" + word + "' is not a vertex id");
    if (v < 0 || v >= n) throw InputError("cut: vertex " + word + " outside 0.." + std::to_string(n - 1));
    out.push_back(v);
  }
  VertexSet b = make_set(out);
  if (b.empty() || static_cast<int>(b.size()) == n) throw InputError("cut: side must be a proper nonempty subset");
  return b;
}

struct BuildArgs {
  std::string input, mode = "basic", out, config;
  uint64_t seed = 1;
  bool seed_set = false;
};

int run_build(const BuildArgs& a) {
  Graph g = read_edge_list_file(a.input);
  Config config = load_config(a.config);
  if (a.seed_set) config.seed = a.seed;
  BuildMode mode = parse_mode(a.mode);
  DecompositionTree t = build_tree(g, mode, config);
  json j = tree_json(t);
  json prov;
  prov["input"] = std::filesystem::path(a.input).filename().string();
  prov["vertices"] = g.vertex_count();
  prov["edges"] = g.edge_count();
  prov["mode"] = mode_name(mode);
  prov["seed"] = config.seed;
  json entries = json::object();
  for (const auto& [k, v] : config.entries()) entries[k] = v;
  prov["config"] = entries;
  j["provenance"] = prov;
  write_text(a.out, j.dump(2) + "\n");
  std::cout << "tree: " << t.nodes.size() << " nodes, height " << t.height() << ", mode " << mode_name(mode) << "\n";
  for (const std::string& f : t.failures) std::cout << "self-check failed: " << f << "\n";
  return t.failures.empty() ? kPass : kViolation;
}

struct VerifyArgs {
  std::string graph, tree, json_out, config;
  bool exhaustive = false;
  int samples = 0;
  uint64_t seed = 1;
};

int run_verify(const VerifyArgs& a) {
  Graph g = read_edge_list_file(a.graph);
  DecompositionTree t = read_tree_file(a.tree);
  Config config = load_config(a.config);
  VerifyOptions o;
  o.exhaustive_limit = config.exhaustive_limit;
  o.samples = config.samples;
  o.seed = config.seed;
  if (a.exhaustive) o.mode = VerifyMode::Exhaustive;
  if (a.samples > 0) {
    o.mode = VerifyMode::Sampled;
    o.samples = a.samples;
    o.seed = a.seed;
  }
  QualityReport r = verify_quality(g, t, o);
  write_quality_table(std::cout, r);
  json j = quality_json(r);
  if (r.ok() && !r.unbounded) {
    Rational flow = verify_flow_quality(r, g.vertex_count());
    j["flow_quality_bound"] = to_string(flow);
    std::cout << "alpha " << to_string(r.quality) << ", flow quality bound " << to_string(flow) << "\n";
  }
  if (a.json_out.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_text(a.json_out, j.dump(2) + "\n");
  return r.ok() && !r.unbounded ? kPass : kViolation;
}

struct ReplayArgs {
  std::string graph, tree, demands, cut, json_out, config;
  bool traces = false;
};

int run_replay(const ReplayArgs& a) {
  Graph g = read_edge_list_file(a.graph);
  DecompositionTree t = read_tree_file(a.tree);
  DemandState p = read_state_file(a.demands);
  VertexSet b = parse_vertex_list(a.cut, g.vertex_count());
  Config config = load_config(a.config);
  ReplayReport r;
  try {
    r = full_replay(g, t, p, b, config, a.traces);
  } catch (const ReplayError& e) {
    std::cout << "replay FAILED at " << e.claim_name << ": " << e.what() << "\n";
    return kViolation;
  }
  json j = ledger_json(g, r);
  std::cout << (r.pass ? "replay passed" : "replay FAILED") << ": dem_P " << to_string(r.ledger.dem_p) << ", covered "
            << to_string(r.ledger.covered) << ", cut capacity " << r.ledger.cut_capacity << "\n";
  if (a.json_out.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_text(a.json_out, j.dump(2) + "\n");
  return r.pass ? kPass : kViolation;
}

struct OracleArgs {
  std::string graph, phi, mu, nu, config;
  bool promote_small = false;
};

int run_oracle(const OracleArgs& a) {
  Graph g = read_edge_list_file(a.graph);
  int n = g.vertex_count();
  Config config = load_config(a.config);
  OracleParams params;
  params.phi = parse_rational(a.phi);
  if (params.phi <= 0) throw InputError("phi must be positive");
  params.logn = graph_logn(n);
  params.threshold = config.threshold;
  params.congestion = config.congestion;
  params.promote_small = a.promote_small;
  Measure mu = read_measure_file(a.mu, n);
  json j;
  std::vector<std::string> problems;
  if (a.nu.empty()) {
    OracleOutcome o = cut_or_expander(g, mu, params);
    j = outcome_json(g, o);
    problems = check_outcome(g, mu, o);
    std::cout << "case " << case_name(o.tag) << "\n";
  } else {
    Measure nu = read_measure_file(a.nu, n);
    RefinedOutcome o = refined_cut_or_expander(g, mu, nu, params);
    j = refined_json(g, o);
    problems = check_refined(g, mu, nu, o);
    std::cout << "case " << case_name(o.tag) << "\n";
  }
  j["postcondition_failures"] = problems;
  std::cout << j.dump(2) << "\n";
  for (const std::string& p : problems) std::cout << "postcondition failed: " << p << "\n";
  return problems.empty() ? kPass : kViolation;
}

int run_export(const std::string& tree, const std::string& dot) {
  DecompositionTree t = read_tree_file(tree);
  std::ostringstream out;
  write_dot(out, t);
  write_text(dot, out.str());
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical tree cut-sparsifiers: build, verify, replay"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build", "build a decomposition tree from an edge list");
  b->add_option("--input", build.input, "edge list (u v cap per line)")->required();
  b->add_option("--mode", build.mode, "basic or improved")->check(CLI::IsMember({"basic", "improved"}));
  b->add_option("--out", build.out, "tree JSON output")->required();
  b->add_option("--seed", build.seed, "seed recorded with the tree");
  b->add_option("--config", build.config, "key = value config file");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "measure tree quality over graph cuts");
  v->add_option("--graph", verify.graph)->required();
  v->add_option("--tree", verify.tree)->required();
  auto* ex = v->add_flag("--exhaustive", verify.exhaustive, "check all 2^(n-1)-1 cuts");
  v->add_option("--samples", verify.samples, "number of random cuts")->excludes(ex)->check(CLI::PositiveNumber);
  v->add_option("--seed", verify.seed, "seed for sampled cuts");
  v->add_option("--json", verify.json_out, "write the report JSON here instead of stdout");
  v->add_option("--config", verify.config);

  ReplayArgs replay;
  auto* r = app.add_subcommand("replay", "replay the charging argument for one demand state and cut");
  r->add_option("--graph", replay.graph)->required();
  r->add_option("--tree", replay.tree)->required();
  r->add_option("--demands", replay.demands, "lines 'vertex commodity num den'")->required();
  r->add_option("--cut", replay.cut, "vertex list or file for side B")->required();
  r->add_option("--json", replay.json_out, "write the ledger JSON here instead of stdout");
  r->add_flag("--traces", replay.traces, "keep per-step traces");
  r->add_option("--config", replay.config);

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle", "run one cut-or-expander call and check it");
  o->add_option("--graph", oracle.graph)->required();
  o->add_option("--phi", oracle.phi, "rational, e.g. 1/4")->required();
  o->add_option("--mu", oracle.mu, "measure file, lines 'v weight'")->required();
  o->add_option("--nu", oracle.nu, "second measure for the refined variant");
  o->add_flag("--promote-small", oracle.promote_small, "report small case-3 outcomes as balanced cuts");
  o->add_option("--config", oracle.config);

  std::string export_tree, export_dot;
  auto* e = app.add_subcommand("export", "render a tree as DOT");
  e->add_option("--tree", export_tree)->required();
  e->add_option("--dot", export_dot)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kUsage;
  }
  build.seed_set = b->count("--seed") > 0;

  try {
    if (*b) return run_build(build);
    if (*v) return run_verify(verify);
    if (*r) return run_replay(replay);
    if (*o) return run_oracle(oracle);
    if (*e) return run_export(export_tree, export_dot);
  } catch (const InputError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& err) {
    std::cerr << "argument error: " << err.what() << "\n";
    return kUsage;
  } catch (const SizeError& err) {
    std::cerr << "size error: " << err.what() << "\n";
    return kUsage;
  } catch (const ContractError& err) {
    std::cerr << "violation: " << err.what() << "\n";
    return kViolation;
  } catch (const ReplayError& err) {
    std::cerr << "replay failed at " << err.claim_name << ": " << err.what() << "\n";
    return kViolation;
  }
  return kUsage;
}
