#include "reprindt/cli.hpp"

int main(int argc, char** argv) { return reprindt::cli_main(argc, argv); }
