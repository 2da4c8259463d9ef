#pragma once

#include <stdexcept>
#include <string>

namespace treecut {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad arguments from the caller (overlapping sets, malformed cuts).
struct ArgumentError : Error {
  using Error::Error;
};

// Exact enumeration requested above the configured threshold.
struct SizeError : Error {
  using Error::Error;
};

// A documented precondition or postcondition does not hold.
struct ContractError : Error {
  using Error::Error;
};

// Malformed files or mismatched graph/tree inputs.
struct InputError : Error {
  using Error::Error;
};

// A claim asserted while replaying the charging argument failed.
struct ReplayError : Error {
  ReplayError(const std::string& claim, const std::string& detail)
      : Error(claim + ": " + detail), claim_name(claim) {}
  std::string claim_name;
};

}  // namespace treecut
