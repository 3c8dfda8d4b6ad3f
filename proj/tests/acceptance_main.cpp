// Runs the full acceptance matrix and prints one PASS/FAIL line per criterion.
// Exit status is non-zero when any criterion fails.

#include <iostream>

#include "brwld/acceptance.hpp"

int main(int argc, char** argv) {
  brwld::AcceptanceOptions options;
  if (argc > 1) options.out_dir = argv[1];
  const auto results = brwld::run_acceptance_suite(options);
  std::cout << brwld::format_acceptance_table(results);
  bool ok = !results.empty();
  for (const auto& r : results) ok = ok && r.passed;
  return ok ? 0 : 1;
}
