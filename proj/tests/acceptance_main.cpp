#include "traceforms/acceptance.hpp"

#include <iostream>
#include <string>

int main(int argc, char** argv) {
  std::string filter;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--filter" && i + 1 < argc) filter = argv[++i];
  }
  const auto results = traceforms::run_acceptance(filter);
  if (results.empty()) {
    std::cerr << "no criteria match filter '" << filter << "'\n";
    return 1;
  }
  const int failures = traceforms::print_acceptance_table(results, std::cout);
  return failures == 0 ? 0 : 1;
}
