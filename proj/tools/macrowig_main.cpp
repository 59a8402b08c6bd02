#include "macrowig/sweep.hpp"

int main(int argc, char** argv) {
    return macrowig::cli_main(argc, argv);
}
