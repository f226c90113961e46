#include <string>
#include <vector>

#include "evcoord/cli.hpp"

int main(int argc, char** argv) {
  return evcoord::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
