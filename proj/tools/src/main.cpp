#include "rkm_cli/cli.hpp"

int main(int argc, char** argv) { return rkm::cli_main(argc, argv); }
