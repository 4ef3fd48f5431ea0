#include "drachma/cli.hpp"

int main(int argc, char** argv) { return drachma::run_cli(argc, argv); }
