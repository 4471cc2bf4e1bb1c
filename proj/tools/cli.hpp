#pragma once

#include <string>
#include <vector>

namespace riesz {

int run_cli(int argc, char** argv);
int run_cli_args(std::vector<std::string> args);

}  // namespace riesz
