#include "fundsim/cli.hpp"

int main(int argc, char** argv) {
    return fundsim::cli::main_entry(argc, argv);
}
