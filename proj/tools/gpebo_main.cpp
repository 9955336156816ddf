#include "gpebo/cli.hpp"

int main(int argc, char** argv) { return gpebo::cli::main(argc, argv); }
