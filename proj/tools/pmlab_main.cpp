#include "pmlab/cli.hpp"

int main(int argc, char** argv) { return pmlab::cli::run(argc, argv); }
