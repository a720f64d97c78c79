#ifndef HOMOG_CLI_HPP
#define HOMOG_CLI_HPP

namespace homog {

/// Command-line front end. Exit codes: 0 success, 1 computational failure,
/// 2 usage/configuration error.
int run_cli(int argc, const char* const* argv);

}  // namespace homog

#endif
