#include "ecgppg/cli.hpp"

int main(int argc, char** argv) { return ecgppg::cli::run(argc, argv); }
