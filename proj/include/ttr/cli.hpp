#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ttr {

namespace exit_code {
inline constexpr int kSuccess = 0;  // also: grounded
inline constexpr int kAborted = 1;
inline constexpr int kInputError = 2;
inline constexpr int kParseFailure = 3;
}  // namespace exit_code

/// Runs one command line (without the program name). Subcommands: train,
/// ground, dialogue, eval, tune, gen-corpus.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace ttr
