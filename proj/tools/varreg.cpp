#include "varreg/cli.hpp"

int main(int argc, char** argv) { return varreg::cli_main(argc, argv); }
