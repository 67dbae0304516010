#include "tmlab/cli.hpp"

int main(int argc, char** argv) { return tmlab::cli::run(argc, argv); }
