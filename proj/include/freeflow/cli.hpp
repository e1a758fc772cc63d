#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace freeflow::cli {

enum ExitCode : int { kOk = 0, kError = 1, kVerdictFail = 2 };

// Runs one CLI invocation. args excludes the program name. Results go to
// --out (plus <out>.manifest.json) or to `out`; diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Worker count from FREEFLOW_THREADS (>= 1), else the hardware count.
unsigned threadCap();

}  // namespace freeflow::cli
