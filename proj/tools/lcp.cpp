#include <iostream>
#include <string>
#include <vector>

#include "lcp_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lcp::app::run(args, std::cout, std::cerr);
}
