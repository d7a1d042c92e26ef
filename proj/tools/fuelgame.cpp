#include "fuelgame/cli.hpp"

int main(int argc, char** argv) { return fuelgame::run_cli(argc, argv); }
