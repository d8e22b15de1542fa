#include <iostream>

#include "cpsdyn/cli.hpp"

int main(int argc, char** argv)
{
    return cpsdyn::run_cli(argc, argv, std::cout, std::cerr);
}
