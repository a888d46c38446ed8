#include <string>
#include <vector>

#include "rlab/cli.hpp"

int main(int argc, char** argv) {
  return rlab::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
