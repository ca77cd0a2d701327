#include "tagbell/cli.hpp"

int main(int argc, char** argv) { return tagbell::run_cli(argc, argv); }
