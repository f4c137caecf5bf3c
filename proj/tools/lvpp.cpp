#include "lvpp/cli.hpp"

int main(int argc, char** argv) { return lvpp::cli_main(argc, argv); }
