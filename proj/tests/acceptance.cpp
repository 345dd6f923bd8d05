#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "crw/parallel.hpp"
#include "crw/verify.hpp"

// Runs every acceptance criterion (or those named on the command line) and
// prints one line per criterion. Exit status is nonzero if any fails.
int main(int argc, char** argv) {
  crw::VerifyOptions opts;
  opts.threads = crw::resolve_threads(0);
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty()) ids = crw::suite_criteria("all");

  int failed = 0;
  for (int id : ids) {
    const crw::CriterionResult r = crw::run_criterion(id, opts);
    std::printf("criterion %2d %-34s %s  (%.1fs)\n", r.id, r.title.c_str(), r.passed() ? "PASS" : "FAIL", r.seconds);
    for (const auto& c : r.checks)
      if (!c.pass) std::printf("    %s: %s\n", c.name.c_str(), c.detail.c_str());
    for (const auto& line : r.table) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
    failed += r.passed() ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(ids.size()) - failed, ids.size());
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
