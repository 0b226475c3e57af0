#include "mbpetd/cli.hpp"

int main(int argc, char** argv) { return mbpetd::cli_main(argc, argv); }
