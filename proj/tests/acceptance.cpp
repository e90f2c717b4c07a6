// Release gate: runs every check in the verification suite and prints one
// pass/fail line per criterion. Exit code is the number of failures.
#include <cstdlib>
#include <iostream>

#include "leomfris/checks.hpp"

int main(int argc, char** argv) {
  const std::string work_dir = argc > 1 ? argv[1] : "acceptance_out";
  std::cout << "verification suite, outputs under " << work_dir << "\n";
  const auto results = leomfris::checks::run_all(work_dir);
  const int failures = leomfris::checks::report(results, std::cout);
  return failures == 0 ? EXIT_SUCCESS : 1;
}
