#include <cstring>
#include <string>

#include "schelling/verify.hpp"

int main(int argc, char** argv) {
  std::string only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--only") && i + 1 < argc)
      only = argv[++i];
    else if (!std::strncmp(argv[i], "--only=", 7))
      only = argv[i] + 7;
  }
  return schelling::run_acceptance(only);
}
