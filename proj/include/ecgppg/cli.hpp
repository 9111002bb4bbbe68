#ifndef ECGPPG_CLI_HPP
#define ECGPPG_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

#include "ecgppg/error.hpp"

namespace ecgppg::cli {

/// Exit statuses: 0 success, 1 other failure, 2 load/validation error or bad
/// usage, 3 SignalTooShort, 4 EmptyVerdicts.
int exit_code_for(ErrorCode code);

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace ecgppg::cli

#endif  // ECGPPG_CLI_HPP
