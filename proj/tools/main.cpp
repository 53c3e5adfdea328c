#include "cohevo/cli.hpp"

int main(int argc, char** argv) { return cohevo::cli::main(argc, argv); }
