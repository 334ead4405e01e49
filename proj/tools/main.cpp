#include "lrcal/cli_ops.hpp"

#include <string>
#include <vector>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lrcal::run_app(args);
}
