#include "hdglue/cli.hpp"

int main(int argc, char** argv) { return hdglue::cli_main(argc, argv); }
