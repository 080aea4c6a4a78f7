#include "proctensor/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    int status = 0;
    const auto config = proctensor::parse_command_line(argc, argv, std::cout, std::cerr, status);
    if (!config) return status;
    return proctensor::run(*config, std::cout, std::cerr);
}
