#include "ectd/cli.hpp"

int main(int argc, char** argv) { return ectd::cli::dispatch(argc, argv); }
