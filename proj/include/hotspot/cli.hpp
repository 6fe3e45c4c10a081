#pragma once

#include <iosfwd>

namespace hotspot {

// The `hotspot` command line. Stored artifacts are reported on `out` as
// manifest lines; progress and reports go to `err`. Returns 0 on success, 2
// on a usage or argument error and 1 when the run itself fails.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hotspot
