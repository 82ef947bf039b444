#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return optinstall::app::run(argc, argv, std::cout, std::cerr); }
