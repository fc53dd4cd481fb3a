#include "wfrelax/cli.hpp"

int main(int argc, char** argv) { return wfrelax::run_cli(argc, argv); }
