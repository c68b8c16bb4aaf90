#include <iostream>

#include "lagweb/cli.hpp"

int main(int argc, char** argv) {
  return lagweb::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
