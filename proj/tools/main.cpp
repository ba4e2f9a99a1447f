#include "tankseis/cli.hpp"

int main(int argc, char** argv) { return tankseis::cli::run(argc, argv); }
