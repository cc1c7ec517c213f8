#include "cli.hpp"

int main(int argc, char** argv) { return ksvc::cli::run(argc, argv); }
