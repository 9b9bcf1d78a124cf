#include "codepoison/cli.hpp"

int main(int argc, char** argv) { return codepoison::cli::run(argc, argv); }
