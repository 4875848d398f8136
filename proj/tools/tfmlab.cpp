#include <iostream>

#include "tfm/cli.hpp"

int main(int argc, char **argv)
{
  return tfm::cli_main(argc, argv, std::cout, std::cerr);
}
