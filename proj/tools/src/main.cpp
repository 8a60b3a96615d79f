#include "vsir/cli.hpp"

int main(int argc, char** argv) { return vsir::cli::dispatch(argc, argv); }
