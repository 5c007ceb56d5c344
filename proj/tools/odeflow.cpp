#include "odeflow/cli.hpp"

int main(int argc, char** argv) { return odeflow::cli::run(argc, argv); }
