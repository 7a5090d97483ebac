#include "spgls/cli.hpp"

int main(int argc, char** argv) { return spgls::cli::main_with_args(argc, argv); }
