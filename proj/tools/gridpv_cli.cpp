#include "gridpv/cli.hpp"

int main(int argc, char** argv) { return gridpv::cli_main(argc, argv); }
