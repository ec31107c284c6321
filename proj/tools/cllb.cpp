#include "cllb/cli.hpp"

int main(int argc, char** argv) { return cllb::cli::run(argc, argv); }
