#include "spamsim/cli.hpp"

int main(int argc, char** argv) { return spamsim::run_cli(argc, argv); }
