#include "funoclust/cli.hpp"

int main(int argc, char** argv) { return funoclust::cli_main(argc, argv); }
