#include "causalforge/cli.hpp"

int main(int argc, char **argv) { return causalforge::run_cli(argc, argv); }
