#include "treecut/config.hpp"

#include "treecut/errors.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

namespace treecut {

Rational graph_logn(int n) {
  if (n <= 2) return 1;
  return log2_approx(n);
}

MergeParams Config::merge_params(int n) const {
  MergeParams p;
  p.logn = graph_logn(n);
  p.theta = theta;
  p.threshold = threshold;
  p.congestion = congestion;
  p.verify = verify;
  return p;
}

RefineParams Config::refine_params(int n) const {
  RefineParams p = RefineParams::for_graph(n);
  p.logn = graph_logn(n);
  p.c_phi = c_phi;
  p.c0 = c0;
  p.c_f = c_f ? *c_f : 4 * c0 / log2_approx(4.0 / 3.0);
  p.kappa = kappa ? *kappa : c_phi / 2;
  p.threshold = threshold;
  p.congestion = congestion;
  p.verify = verify;
  return p;
}

Rational Config::basic_tau(int n) const { return tau ? *tau : 1 / graph_logn(n); }

std::map<std::string, std::string> Config::entries() const {
  std::map<std::string, std::string> m;
  m["theta"] = to_string(theta);
  m["congestion"] = to_string(congestion);
  m["threshold"] = std::to_string(threshold);
  m["verify"] = verify ? "1" : "0";
  m["tau"] = tau ? to_string(*tau) : "auto";
  m["c_phi"] = to_string(c_phi);
  m["c0"] = to_string(c0);
  m["c_f"] = c_f ? to_string(*c_f) : "auto";
  m["kappa"] = kappa ? to_string(*kappa) : "auto";
  m["charge_c"] = to_string(charge_c);
  m["quality_c"] = to_string(quality_c);
  m["samples"] = std::to_string(samples);
  m["seed"] = std::to_string(seed);
  m["exhaustive_limit"] = std::to_string(exhaustive_limit);
  return m;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Rational positive(const std::string& v) {
  Rational q = parse_rational(v);
  if (q <= 0) throw InputError("expected a positive value, got '" + v + "'");
  return q;
}

int64_t integer(const std::string& v) {
  size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw InputError("expected an integer, got '" + v + "'");
  }
  if (used != v.size()) throw InputError("expected an integer, got '" + v + "'");
  return x;
}

}  // namespace

Config parse_config(std::istream& in, const std::string& name) {
  Config c;
  using Setter = std::function<void(const std::string&)>;
  std::map<std::string, Setter> set = {
      {"theta", [&](const std::string& v) { c.theta = positive(v); }},
      {"congestion", [&](const std::string& v) { c.congestion = positive(v); }},
      {"threshold", [&](const std::string& v) { c.threshold = static_cast<int>(integer(v)); }},
      {"verify", [&](const std::string& v) { c.verify = integer(v) != 0; }},
      {"tau", [&](const std::string& v) { c.tau = v == "auto" ? std::nullopt : std::optional(positive(v)); }},
      {"c_phi", [&](const std::string& v) { c.c_phi = positive(v); }},
      {"c0", [&](const std::string& v) { c.c0 = positive(v); }},
      {"c_f", [&](const std::string& v) { c.c_f = v == "auto" ? std::nullopt : std::optional(positive(v)); }},
      {"kappa", [&](const std::string& v) { c.kappa = v == "auto" ? std::nullopt : std::optional(positive(v)); }},
      {"charge_c", [&](const std::string& v) { c.charge_c = positive(v); }},
      {"quality_c", [&](const std::string& v) { c.quality_c = positive(v); }},
      {"samples", [&](const std::string& v) { c.samples = static_cast<int>(integer(v)); }},
      {"seed", [&](const std::string& v) { c.seed = static_cast<uint64_t>(integer(v)); }},
      {"exhaustive_limit", [&](const std::string& v) { c.exhaustive_limit = static_cast<int>(integer(v)); }},
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    std::string where = name + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw InputError(where + "expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    auto it = set.find(key);
    if (it == set.end()) throw InputError(where + "unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const Error& e) {
      throw InputError(where + e.what());
    }
  }
  if (c.tau && *c.tau > 1) throw InputError(name + ": tau must lie in (0, 1]");
  if (c.threshold < 1 || c.threshold > 30) throw InputError(name + ": threshold must lie in 1..30");
  if (c.samples < 0) throw InputError(name + ": samples must be nonnegative");
  return c;
}

Config read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_config(in, path);
}

void write_config(std::ostream& out, const Config& c) {
  for (const auto& [k, v] : c.entries()) out << k << " = " << v << "\n";
}

}  // namespace treecut
