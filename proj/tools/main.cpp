#include "lmidom_cli.hpp"

int main(int argc, char** argv) { return lmidom::cli::run(argc, argv); }
