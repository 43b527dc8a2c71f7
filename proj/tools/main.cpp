#include "bevkit/cli.hpp"

int main(int argc, char** argv) { return bevkit::cli::run(argc, argv); }
