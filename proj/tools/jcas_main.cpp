#include "jcas/cli.hpp"

int main(int argc, char** argv) { return jcas::run_cli(argc, argv); }
