// Runs every acceptance criterion and prints one line per criterion.

#include <algorithm>
#include <cstdlib>
#include <iostream>

#include "sng/acceptance.hpp"

int main() {
  sng::AcceptanceOptions options;
  options.out = "acceptance_out";
  if (const char* env = std::getenv("SIM_THREADS")) options.jobs = std::max(1, std::atoi(env));
  const auto report = sng::run_acceptance(options, &std::cout);
  const auto passed = std::count_if(report.criteria.begin(), report.criteria.end(),
                                    [](const sng::CriterionResult& c) { return c.passed(); });
  std::cout << passed << '/' << report.criteria.size() << " criteria passed\n";
  return report.passed() ? 0 : 1;
}
