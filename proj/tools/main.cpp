#include "wavepilot/cli.hpp"

int main(int argc, char** argv) { return wavepilot::run_cli(argc, argv); }
