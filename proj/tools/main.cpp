#include <iostream>
#include <iterator>
#include <string>
#include <vector>

#include "anisotope/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string input;
  if (!args.empty() && args.front() == "check")
    input.assign(std::istreambuf_iterator<char>(std::cin),
                 std::istreambuf_iterator<char>());
  return anisotope::cli::run(args, input, std::cout);
}
