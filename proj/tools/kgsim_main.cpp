#include "kgsim/cli.hpp"

int main(int argc, char** argv) { return kgsim::cli::dispatch(argc, argv); }
