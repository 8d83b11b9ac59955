#include "cli.hpp"

int main(int argc, char** argv) { return ltpc::cli::run_main(argc, argv); }
