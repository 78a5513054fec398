#include "momc/cli.hpp"

int main(int argc, char** argv) { return momc::run_cli(argc, argv); }
