#include "affvortex/cli.hpp"

int main(int argc, char** argv) { return affvortex::cli::run(argc, argv); }
