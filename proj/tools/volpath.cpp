#include "volpath/cli.hpp"

int main(int argc, char** argv) { return volpath::run_cli(argc, argv); }
