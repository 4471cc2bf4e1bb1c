#include "cli.hpp"

int main(int argc, char** argv) { return riesz::run_cli(argc, argv); }
