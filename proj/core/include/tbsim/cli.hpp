#pragma once

#include <string>
#include <vector>

namespace tbsim {

/// Command-line entry point shared by the tool and the tests.
/// Subcommands: simulate, analyze, compare, validate.
/// Exit codes: 0 success, 1 user/config/io error, 2 numerical failure.
int cli_dispatch(const std::vector<std::string>& args);
int cli_dispatch(int argc, const char* const* argv);

std::string tool_version();

}  // namespace tbsim
