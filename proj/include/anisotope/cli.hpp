#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace anisotope::cli {

// Runs one invocation of the command-line tool.  `args` is the argument
// vector without the program name; `input` carries piped data for the
// subcommands that read it (check takes the certificate JSON there).
// Exactly one JSON document is written to `out`, on a single line unless
// --pretty is given.  Returns the process exit code: 0 success, 2
// malformed request, 3 undetermined within the search bound, 4 internal
// invariant breach.
int run(const std::vector<std::string>& args, const std::string& input,
        std::ostream& out);

}  // namespace anisotope::cli
