#include "termgen/cli.hpp"

int main(int argc, char** argv) { return termgen::cli(argc, argv); }
