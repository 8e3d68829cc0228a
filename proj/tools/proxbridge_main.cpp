#include "proxbridge/cli_io.hpp"

int main(int argc, char** argv) { return proxbridge::cli::main_entry(argc, argv); }
