#include "semisar/cli.hpp"

int main(int argc, char** argv) { return semisar::run_cli(argc, argv); }
