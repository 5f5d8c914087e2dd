#include "pass/cli.hpp"

int main(int argc, char** argv) { return pass::cli::main(argc, argv); }
