#include <iostream>
#include <string>
#include <vector>

#include "dataagent/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dataagent::run_command(args, std::cout, std::cerr);
}
