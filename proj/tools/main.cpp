#include <iostream>
#include <string>
#include <vector>

#include "tenrank/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const tenrank::CliResult res = tenrank::run_cli(args);
  std::cout << res.out;
  std::cerr << res.err;
  return res.code;
}
