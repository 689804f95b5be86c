#include "rpb/cli.hpp"

int main(int argc, char** argv) { return rpb::cli::run_cli(argc, argv); }
