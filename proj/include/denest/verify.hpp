#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace denest {

struct PropertyResult {
  std::string property;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<PropertyResult> properties;
  bool all_pass() const;
};

std::vector<std::string> verify_suite_list();

// cases = 0 keeps each suite's default sizing (the acceptance-grade run)
SuiteReport run_verify_suite(const std::string& name, std::uint64_t seed = 20240817,
                             int cases = 0);

// property, measured value, bound, margin, status
void print_suite_report(const SuiteReport& report, std::ostream& os);

}  // namespace denest
