#include <iostream>
#include <string>
#include <vector>

#include "twlab/app.hpp"

int main(int argc, char** argv) {
  return twlab::app::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
