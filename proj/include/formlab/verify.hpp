#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "formlab/json_io.hpp"

namespace formlab {

struct SuiteResult {
  std::string id;      // "C1".."C10" for the acceptance sweeps, "P-<module>-k" for properties
  std::string anchor;  // theorem the suite certifies
  std::string module;
  bool passed = false;
  std::string detail;  // deterministic summary numbers
  double seconds = 0.0;
};

struct VerifyOptions {
  std::string scope = "all";  // all or a module name
  std::uint64_t seed = 20240917;
};

/// Module names accepted as a scope, plus "all".
std::vector<std::string> verify_scopes();

/// Runs every suite in scope. Results depend only on the seed, not on timing
/// or thread count. Throws InvalidInput for an unknown scope.
std::vector<SuiteResult> run_verify(const VerifyOptions& options);

/// One acceptance sweep, k in 1..10.
SuiteResult run_criterion(int k, std::uint64_t seed);

/// Fixed-width pass/fail table without timings (byte-identical across runs).
std::string format_summary(const std::vector<SuiteResult>& results, const VerifyOptions& options);

json_io::Json verify_json(const std::vector<SuiteResult>& results, const VerifyOptions& options);

}  // namespace formlab
