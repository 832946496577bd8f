#include "symvi/cli.hpp"

int main(int argc, char** argv) { return symvi::cli_main(argc, argv); }
