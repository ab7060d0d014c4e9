#include "essa/cli.hpp"

int main(int argc, char** argv) { return essa::cli::run(argc, argv); }
