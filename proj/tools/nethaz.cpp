#include "nethaz/cli.hpp"

int main(int argc, char** argv) { return nethaz::run_cli(argc, argv); }
