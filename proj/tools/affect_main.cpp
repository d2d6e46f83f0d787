#include <vector>

#include "affect/pipeline/orchestrator.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return affect::pipeline::run_cli(args);
}
