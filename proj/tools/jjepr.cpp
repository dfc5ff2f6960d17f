#include "jjepr/cli.hpp"

int main(int argc, char** argv) { return jjepr::cli::run(argc, argv); }
