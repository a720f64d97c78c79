#include "homog/cli.hpp"

int main(int argc, char** argv) { return homog::run_cli(argc, argv); }
