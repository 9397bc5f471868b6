#include "manibo/cli/commands.hpp"

int main(int argc, char** argv) { return manibo::cli::run_cli(argc, argv); }
