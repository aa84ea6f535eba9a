#include "cli.hpp"

int main(int argc, char** argv) { return ctcd::cli::run(argc, argv); }
