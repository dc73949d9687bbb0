#include "lzs/cli.hpp"

int main(int argc, char** argv) { return lzs::cli::run_cli(argc, argv); }
