#include "ghzkd/cli.hpp"

int main(int argc, char** argv) {
    return ghzkd::run_cli(argc, argv);
}
