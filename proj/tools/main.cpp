#include "trusthmd/cli.hpp"

int main(int argc, char** argv) { return trusthmd::cli_main(argc, argv); }
