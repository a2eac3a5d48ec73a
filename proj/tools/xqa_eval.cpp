#include "xqa/cli.hpp"

int main(int argc, char** argv) { return xqa::cli::run(argc, argv); }
