#include <string>
#include <vector>

#include "collapse/cli.hpp"

int main(int argc, char** argv) {
  return collapse::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
