#include "uca/cli.hpp"

int main(int argc, char** argv) { return uca::cli::main(argc, argv); }
