#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rlab/kernel.hpp"

namespace rlab {

// Exit statuses of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitArgument = 2,
  kExitCapacity = 3,
  kExitVerification = 4,
};

struct CliHooks {
  std::ostream* out = nullptr;  // defaults to std::cout
  std::ostream* err = nullptr;  // defaults to std::cerr
  WeightFn kernel_weight = &weight;
};

// args excludes the program name, e.g. {"sieve", "--limit", "1000000"}.
int run_cli(const std::vector<std::string>& args, const CliHooks& hooks = {});

int exit_code_for(const std::exception& e);

}  // namespace rlab
