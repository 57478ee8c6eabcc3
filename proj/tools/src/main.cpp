#include "commands.hpp"

int main(int argc, char** argv) { return rep::cli::main_cli(argc, argv); }
