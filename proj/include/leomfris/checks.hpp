// End-to-end verification suite: one callable check per release gate, from
// gradient correctness up to the desk-scale learning comparisons. Used by the
// acceptance binary and the `check` CLI subcommand.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace leomfris::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Runs every check in order. work_dir receives run outputs (metrics,
// checkpoints, summaries) for the training-based checks; it is created if
// missing. A check that throws is reported as a failure, not a crash.
std::vector<CheckResult> run_all(const std::string& work_dir);

// Prints one "[PASS]/[FAIL] name: detail" line per result; returns the
// number of failures.
int report(const std::vector<CheckResult>& results, std::ostream& os);

}  // namespace leomfris::checks
