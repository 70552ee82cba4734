#include <iostream>

#include "ergoloop/cli.hpp"

int main(int argc, char** argv)
{
    return ergoloop::run_cli(argc, argv, std::cout, std::cerr);
}
