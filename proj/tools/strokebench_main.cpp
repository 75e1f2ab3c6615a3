#include <string>
#include <vector>

#include "stroke/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return stroke::run_command(args);
}
