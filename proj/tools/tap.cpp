#include "tap/cli.hpp"

int main(int argc, char** argv) { return tap::cli::run(argc, argv); }
