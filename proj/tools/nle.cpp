#include <vector>

#include "nle/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nle::cli::run_command(std::move(args));
}
