#pragma once

#include "treecut/merge_phase.hpp"
#include "treecut/refinement.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace treecut {

// Every tunable constant in one place. Unset optionals are derived from the
// input size when the parameters are built.
struct Config {
  Rational theta = rat(3, 10);           // merge-phase oracle ratio
  Rational congestion = 4;               // oracle routing cap
  int threshold = kDefaultBruteThreshold;
  bool verify = true;
  std::optional<Rational> tau;           // basic mode; default 1 / log n
  Rational c_phi = rat(3, 80);
  Rational c0 = 1;
  std::optional<Rational> c_f;           // default 4 c0 / log(4/3)
  std::optional<Rational> kappa;         // default c_phi / 2
  Rational charge_c = 6;                 // alpha' = alpha (1 + charge_c tau)
  Rational quality_c = 2;                // alpha <= quality_c log^2 n max(1, loglog n)
  int samples = 10000;
  uint64_t seed = 1;
  int exhaustive_limit = 12;

  MergeParams merge_params(int n) const;
  RefineParams refine_params(int n) const;
  Rational basic_tau(int n) const;
  std::map<std::string, std::string> entries() const;
};

// "key = value" lines, '#' comments. Unknown keys and malformed values raise
// InputError with the line number.
Config parse_config(std::istream& in, const std::string& name = "<config>");
Config read_config_file(const std::string& path);
void write_config(std::ostream& out, const Config& c);

// log2 of the vertex count used by every phase (at least 1).
Rational graph_logn(int n);

}  // namespace treecut
