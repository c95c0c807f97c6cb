#include "horizon_limit/cli.hpp"

int main(int argc, char** argv) { return horizon_limit::main_entry(argc, argv); }
