#include "cli.hpp"

int main(int argc, char** argv) { return spraycp::cli::run(argc, argv); }
