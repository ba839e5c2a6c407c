#ifndef SPADESIM_CLI_APP_HPP
#define SPADESIM_CLI_APP_HPP

#include <string>
#include <vector>

namespace spadesim::cli {

// Runs the command line interface.  Exit codes: 0 success, 1 input error
// (including unknown subcommands and malformed spec files), 2 numerical
// stability error.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

} // namespace spadesim::cli

#endif
