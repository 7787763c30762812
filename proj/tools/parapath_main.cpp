#include <parapath/cli.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    return parapath::cli::main(argc, argv, std::cout, std::cerr);
}
