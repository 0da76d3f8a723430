#include "rmg1/commands.hpp"

int main(int argc, char** argv) { return rmg1::cli::run(argc, argv); }
