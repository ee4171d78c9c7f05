#include "isbm/cli.hpp"

int main(int argc, char** argv) { return isbm::cli::main(argc, argv); }
