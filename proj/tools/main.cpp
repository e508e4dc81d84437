#include "saddle3/cli.hpp"

int main(int argc, char** argv) { return saddle3::cli_main(argc, argv); }
