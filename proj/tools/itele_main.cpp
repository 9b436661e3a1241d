#include <vector>

#include "itele/cli.hpp"

int main(int argc, char** argv) {
    return itele::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
