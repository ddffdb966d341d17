#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace avvp {

// Entry point behind the `avvp` binary: synth, train, parse, eval, gradcheck.
// Human-readable output goes to `out`; failures print one JSON line
// {"error": kind, "message": ...} to `err` and return nonzero.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace avvp
