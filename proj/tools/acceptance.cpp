// Runs acceptance criteria 1-10, one pass/fail line each.
// Usage: acceptance [seed] [criterion ...]

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "lorkam/verify.hpp"

int main(int argc, char** argv) {
  lorkam::verify::Options opt;
  std::vector<int> ids;
  if (argc > 1) opt.seed = static_cast<unsigned>(std::strtoul(argv[1], nullptr, 10));
  for (int i = 2; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  int failed = 0;
  lorkam::verify::run(ids, opt, [&](const lorkam::verify::CriterionResult& r) {
    std::printf("%s\n", lorkam::verify::format_line(r).c_str());
    std::fflush(stdout);
    failed += !r.pass;
  });
  std::printf("%s\n", failed ? "acceptance: FAILED" : "acceptance: all criteria passed");
  return failed ? 1 : 0;
}
