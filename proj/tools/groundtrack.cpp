#include "groundtrack/cli.hpp"

int main(int argc, char** argv) { return groundtrack::cli(argc, argv); }
