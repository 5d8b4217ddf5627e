#include <iostream>
#include <string>
#include <vector>

#include "stroke_painter_cli/commands.hpp"

int main(int argc, char** argv) {
  return stroke_painter::cli::main_entry(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
