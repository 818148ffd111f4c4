#include "alkit/cli.hpp"

int main(int argc, char** argv) { return alkit::cli_main(argc, argv); }
