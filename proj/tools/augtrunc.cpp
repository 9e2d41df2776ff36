#include "augtrunc/cli.hpp"

int main(int argc, char** argv) { return augtrunc::cli_main(argc, argv); }
