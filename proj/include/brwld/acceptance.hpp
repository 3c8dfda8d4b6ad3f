#pragma once

// The bundled acceptance matrix. Each criterion produces a pass/fail verdict,
// a one-line detail and CSV artifacts; run_acceptance_suite writes the
// artifacts and checks that they parse.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace brwld {

struct AcceptanceOptions {
  std::uint64_t seed = 20240917;
  unsigned workers = 1;
  std::filesystem::path out_dir = "verify_out";
  // Empty selects every criterion.
  std::set<int> only;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;  // 0 when the criterion has no runtime bound
};

/// Artifacts by file name; contents are deterministic given (seed, criterion).
using Artifacts = std::map<std::string, std::string>;

std::vector<CriterionResult> run_acceptance_suite(const AcceptanceOptions& options);

/// Fixed-width table, one line per criterion.
std::string format_acceptance_table(const std::vector<CriterionResult>& results);

}  // namespace brwld
