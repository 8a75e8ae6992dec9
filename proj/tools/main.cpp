#include "bsgm/cli.hpp"

int main(int argc, char** argv) { return bsgm::run_cli(argc, argv); }
