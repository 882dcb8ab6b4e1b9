#include <string>
#include <vector>

#include "tsr/pipeline.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return tsr::cli_main(args);
}
