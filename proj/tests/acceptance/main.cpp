#include <cstdlib>
#include <iostream>
#include <string>

#include "varbif_test/acceptance.hpp"

int main(int argc, char** argv) {
  varbif::testing::SuiteOptions options;
  bool verbose = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--verbose" || arg == "-v") {
      verbose = true;
    } else if (arg == "--seed" && i + 1 < argc) {
      options.seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      std::cerr << "usage: varbif_acceptance [--verbose] [--seed N]\n";
      return 2;
    }
  }
  const auto results = varbif::testing::run_acceptance(options);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (verbose ? varbif::testing::render(r) : varbif::testing::summary_line(r) + "\n");
    if (!r.passed) ++failed;
  }
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
